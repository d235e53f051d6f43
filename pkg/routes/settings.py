"""Access to the active Config class from inside a request."""
from flask import current_app

from config import config


def planner_config():
    """Config class the running app was created with."""
    return config[current_app.config.get('CONFIG_NAME', 'default')]
