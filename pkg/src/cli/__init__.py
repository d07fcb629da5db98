"""
命令行接口模块
提供CLI功能
"""

