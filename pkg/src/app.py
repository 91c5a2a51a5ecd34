"""
Sanic Application Initialization
--------------------------------
Creates and configures the Sanic app with all blueprints and settings.
"""

from sanic import Sanic
from sanic_cors import CORS
import logging
from src.utils.config import config, configure_logging
from src.routes import api_v1
from src.services.signal_core import build_fourier_table
from src.models import ModulationBlock

# Set up logging
configure_logging()
logger = logging.getLogger(__name__)

# Create the Sanic app instance
app = Sanic("fdris_backend")

# Configure the app settings
app.config.update({
    'KEEP_ALIVE_TIMEOUT': 600,
    'RESPONSE_TIMEOUT': 600,
    'REQUEST_TIMEOUT': 600,
})

# Enable CORS
CORS(app)

# Register API routes
app.blueprint(api_v1)


@app.listener('before_server_start')
async def warm_fourier_table(app, loop):
    """Build the default Fourier table before the first request needs it"""
    defaults = ModulationBlock()
    table = build_fourier_table(defaults.slots, defaults.truncation)
    logger.info(f"Fourier table ready: L={table.slots}, Z={table.truncation}")


if __name__ == "__main__":
    app.run(
        host=config.SERVER_HOST,
        port=config.SERVER_PORT,
        debug=config.SERVER_DEBUG,
        workers=config.SERVER_WORKERS
    )
