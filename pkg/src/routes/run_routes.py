"""
Run Routes
----------
Optimization and beam-pattern endpoints. Requests carry the same scenario and
run-record documents the CLI reads and writes; the numerical work runs in the
default executor so the event loop stays responsive.
"""

import asyncio
import logging

from pydantic import ValidationError
from sanic import Blueprint
from sanic.request import Request
from sanic.response import JSONResponse

from src.models import PatternRequest
from src.services.experiments import RecordDesign, run_optimization
from src.services.pattern_metrics import GridSpec
from src.utils.config import config
from src.utils.exceptions import ConfigError, FdRisError
from src.utils.responses import success_response, error_response, failure_response
from src.utils.validation import parse_scenario

logger = logging.getLogger(__name__)


def _body_text(request: Request) -> str:
    text = request.body.decode('utf-8') if request.body else ''
    if not text.strip():
        raise ConfigError('Request body is empty', "EMPTY_BODY")
    return text


def validate_pattern_request(text: str) -> PatternRequest:
    try:
        return PatternRequest.model_validate_json(text)
    except ValidationError as e:
        raise ConfigError(
            "Invalid pattern request",
            "CONFIG_VALIDATION_ERROR",
            {'errors': [
                {'field': '.'.join(str(p) for p in err['loc']), 'message': err['msg']}
                for err in e.errors()
            ]},
        )


def setup_run_routes(blueprint: Blueprint) -> None:
    @blueprint.post("/runs/optimize")
    async def optimize_route(request: Request) -> JSONResponse:
        """
        Optimize a scenario and return its run record

        Request body: a scenario document (same schema as the CLI scenario files)
        """
        try:
            cfg = parse_scenario(_body_text(request), '<request>')
            loop = asyncio.get_running_loop()
            record = await loop.run_in_executor(None, run_optimization, cfg)
            data = record.model_dump(mode='json')
            data['wall_time_s'] = record.wall_time_s
            return success_response(data=data, message="Optimization finished")
        except FdRisError as e:
            return failure_response(e)
        except Exception as e:
            logger.exception(f"Optimization request failed: {e}")
            return error_response(
                message="Internal server error during optimization",
                error_code="OPTIMIZATION_ERROR",
                details={"error": str(e)},
                status=500
            )

    @blueprint.post("/runs/pattern")
    async def pattern_route(request: Request) -> JSONResponse:
        """
        Received-power pattern of the surface stored in a run record

        Request body:
        {
            "record": {...},             // a run record
            "pattern": {...},            // optional grid, defaults to the record's
            "include_path_loss": true    // optional
        }
        """
        try:
            req = validate_pattern_request(_body_text(request))
            block = req.pattern or req.record.config.pattern
            cells = block.distance_points * block.azimuth_points
            if cells > config.MAX_PATTERN_CELLS:
                return error_response(
                    message="Pattern grid is too large",
                    error_code="PATTERN_TOO_LARGE",
                    details={"cells": cells, "limit": config.MAX_PATTERN_CELLS},
                    status=400
                )
            include_path_loss = block.include_path_loss if req.include_path_loss is None else req.include_path_loss
            grid = GridSpec.from_block(block, req.record.config.geometry.user.elevation_deg)
            design = RecordDesign.from_record(req.record)
            loop = asyncio.get_running_loop()
            pattern = await loop.run_in_executor(None, design.pattern, grid, include_path_loss)
            return success_response(
                data={
                    'seed': req.record.seed,
                    'config_sha256': req.record.config_hash,
                    'include_path_loss': include_path_loss,
                    'pattern': pattern.to_dict(),
                },
                message="Pattern computed"
            )
        except FdRisError as e:
            return failure_response(e)
        except Exception as e:
            logger.exception(f"Pattern request failed: {e}")
            return error_response(
                message="Internal server error during pattern computation",
                error_code="PATTERN_ERROR",
                details={"error": str(e)},
                status=500
            )
