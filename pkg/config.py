import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _float(name, default):
    return float(os.getenv(name, default))


def _int(name, default):
    return int(os.getenv(name, default))


class Config:
    """Base configuration class."""

    # Flask Configuration
    SECRET_KEY = os.getenv('SECRET_KEY', 'dev-secret-key-change-in-production')
    DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'
    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO').upper()

    # Database Configuration - skill library persistence
    DATABASE_URL = os.getenv('DATABASE_URL', 'sqlite:///skills.db')

    # Convert postgresql:// to postgresql+psycopg:// for psycopg3 compatibility
    if DATABASE_URL.startswith('postgresql://'):
        SQLALCHEMY_DATABASE_URI = DATABASE_URL.replace('postgresql://', 'postgresql+psycopg://', 1)
    else:
        SQLALCHEMY_DATABASE_URI = DATABASE_URL

    SQLALCHEMY_TRACK_MODIFICATIONS = False
    SQLALCHEMY_ENGINE_OPTIONS = {
        'pool_pre_ping': True,  # Verifies connections before use
        'pool_recycle': 3600,   # Recycle connections every hour
    }

    # Segmentation and guiding-pose extraction
    SEGMENT_TOL_ROT = _float('SEGMENT_TOL_ROT', 0.05)       # rad
    SEGMENT_TOL_TRANS = _float('SEGMENT_TOL_TRANS', 0.005)  # m
    ROI_RADIUS = _float('ROI_RADIUS', 0.25)                 # m

    # ScLERP + rate-control tracker
    TRACKER_STEP_TAU = _float('TRACKER_STEP_TAU', 0.02)
    TRACKER_DAMPING = _float('TRACKER_DAMPING', 0.01)
    TRACKER_MAX_JOINT_STEP = _float('TRACKER_MAX_JOINT_STEP', 0.1)
    TRACKER_POSE_TOL_ROT = _float('TRACKER_POSE_TOL_ROT', 1e-3)
    TRACKER_POSE_TOL_TRANS = _float('TRACKER_POSE_TOL_TRANS', 1e-3)
    TRACKER_MAX_ITERS = _int('TRACKER_MAX_ITERS', 200)
    TRACKER_CONVERGE_TOL = _float('TRACKER_CONVERGE_TOL', 1e-10)

    # Simulated protocol execution (seconds of virtual time)
    GATE_POLL_INTERVAL = _float('GATE_POLL_INTERVAL', 1.0)
    GATE_TIMEOUT = _float('GATE_TIMEOUT', 86400.0)
    MOTION_SECONDS_PER_CONFIG = _float('MOTION_SECONDS_PER_CONFIG', 0.05)


class DevelopmentConfig(Config):
    """Development-specific configuration."""
    DEBUG = True


class ProductionConfig(Config):
    """Production-specific configuration."""
    DEBUG = False

    SQLALCHEMY_ENGINE_OPTIONS = {
        'pool_pre_ping': True,
        'pool_recycle': 300,
        'pool_size': 5,
        'max_overflow': 0,
        'pool_timeout': 20,
    }


class TestingConfig(Config):
    """Testing-specific configuration."""
    TESTING = True
    SQLALCHEMY_DATABASE_URI = 'sqlite:///:memory:'  # In-memory for tests
    SQLALCHEMY_ENGINE_OPTIONS = {}


# Configuration dictionary
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config(name=None):
    """Config class for ``name``, defaulting to SCREWPBD_ENV."""
    return config[name or os.getenv('SCREWPBD_ENV', 'default')]
