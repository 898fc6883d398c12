from .model import ConfigError
