"""
集成测试
"""

