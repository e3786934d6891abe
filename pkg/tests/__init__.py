# 测试模块初始化