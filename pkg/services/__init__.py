# 纠缠分析服务
