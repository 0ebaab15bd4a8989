# 批量扫描任务
