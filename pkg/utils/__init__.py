# 公共工具
