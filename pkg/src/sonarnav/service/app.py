"""FastAPI wrapper around the simulator.

Run with: uvicorn sonarnav.service.app:app
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import handlers
from .schemas import (FilterRequest, FilterResponse, MapConvertRequest,
                      MapConvertResponse, SimulateRequest, SimulateResponse,
                      ValidateRequest, ValidateResponse)


def create_app() -> FastAPI:
    app = FastAPI(title="sonarnav",
                  description="Ultrasonic-ranging navigation simulator")

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest):
        try:
            return handlers.simulate(req)
        except ValueError as e:
            raise HTTPException(status_code=400, detail=str(e)) from e

    @app.post("/filter", response_model=FilterResponse)
    def run_filter(req: FilterRequest):
        try:
            return handlers.run_filter(req)
        except ValueError as e:
            raise HTTPException(status_code=400, detail=str(e)) from e

    @app.post("/mapconv", response_model=MapConvertResponse)
    def convert_map(req: MapConvertRequest):
        try:
            return handlers.convert_map(req)
        except ValueError as e:
            raise HTTPException(status_code=400, detail=str(e)) from e

    @app.post("/validate", response_model=ValidateResponse)
    def validate_scenario(req: ValidateRequest):
        return handlers.validate_scenario(req)

    return app


app = create_app()
