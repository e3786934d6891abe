# utils模块初始化
from .file_utils import FileUtils, load_config
from .logger import setup_logger, get_logger
from .error_handler import KorobovError, handle_error

__all__ = [
    'FileUtils',
    'load_config',
    'setup_logger',
    'get_logger',
    'KorobovError',
    'handle_error',
]
