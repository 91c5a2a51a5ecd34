"""
API Routes
----------
Collection of all API routes and blueprints.
"""
from sanic.request import Request
from sanic.response import JSONResponse
from sanic import Blueprint
from src.routes.run_routes import setup_run_routes
from src.utils.config import TOOL_VERSION
from src.utils.responses import success_response, error_response

# Create API blueprint
api_v1 = Blueprint('api_v1', url_prefix='')


# Health check route
@api_v1.get("/health")
async def health_check(request: Request) -> JSONResponse:
    """Health check endpoint for the simulation service"""
    try:
        return success_response(
            data={"status": "healthy", "tool_version": TOOL_VERSION},
            message="Simulation service is healthy"
        )
    except Exception as e:
        return error_response(
            message="Simulation service health check failed",
            error_code="HEALTH_CHECK_FAILED",
            details={"error": str(e)},
            status=500
        )

# Initialize routes
setup_run_routes(api_v1)
