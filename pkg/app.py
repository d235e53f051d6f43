"""
WSGI entry point for the planning service (``gunicorn app:app``).

This file creates the Flask application using the application factory pattern.
"""
import logging
import os

from __init__ import create_app

logger = logging.getLogger(__name__)

# Determine configuration based on environment
config_name = os.getenv('SCREWPBD_ENV', 'development')
app = create_app(config_name)

if __name__ == '__main__':
    # Only run directly if this file is executed (not imported)
    port = int(os.getenv('PORT', 5000))
    debug = os.getenv('DEBUG', 'True').lower() == 'true'

    logger.info("Starting planning service (%s) on port %d, debug=%s", config_name, port, debug)

    app.run(
        host='0.0.0.0',
        port=port,
        debug=debug
    )
