"""
配置管理模块
"""

from .settings import settings, Settings, load_flat_config

__all__ = ["settings", "Settings", "load_flat_config"]
