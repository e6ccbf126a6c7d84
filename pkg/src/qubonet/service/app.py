"""HTTP service wrapping compilation, training, comparison, and sampling."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, pipeline
from ..errors import ConfigError, SolverError
from ..qubo import QuboModel
from ..solvers import SamplerConfig, sa_sample
from . import schemas


def create_app() -> FastAPI:
    app = FastAPI(title="qubonet", version=__version__)

    @app.exception_handler(ConfigError)
    async def _config_error(request: Request, exc: ConfigError):
        return JSONResponse(
            status_code=422, content={"detail": str(exc), "kind": "config"}
        )

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=422, content={"detail": str(exc), "kind": "config"}
        )

    @app.exception_handler(SolverError)
    async def _solver_error(request: Request, exc: SolverError):
        return JSONResponse(
            status_code=500, content={"detail": str(exc), "kind": "solver"}
        )

    @app.get("/healthz", response_model=schemas.HealthResponse)
    def healthz():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/api/compile", response_model=schemas.CompileResponse)
    def compile_endpoint(req: schemas.CompileRequest):
        return pipeline.compile_run(req.to_config())

    @app.post("/api/train", response_model=schemas.TrainResponse)
    def train_endpoint(req: schemas.TrainRequest):
        return pipeline.train_run(req.to_config())

    @app.post("/api/compare", response_model=schemas.TrainResponse)
    def compare_endpoint(req: schemas.CompareRequest):
        return pipeline.compare_run(req.to_config())

    @app.post("/api/reduce", response_model=schemas.ReduceResponse)
    def reduce_endpoint(req: schemas.ReduceRequest):
        return pipeline.reduce_run(
            req.polynomial, lam=req.lam, verify=req.verify, max_vars=req.max_vars
        )

    @app.post("/api/datasets/generate", response_model=schemas.DatasetGenResponse)
    def dataset_endpoint(req: schemas.DatasetGenRequest):
        return pipeline.dataset_gen_run(
            name=req.name, n=req.n, noise=req.noise, seed=req.seed
        )

    @app.post("/api/sample", response_model=schemas.SampleResponse)
    def sample_endpoint(req: schemas.SampleRequest):
        model = QuboModel.from_doc(req.qubo)
        cfg = SamplerConfig(num_reads=req.num_reads)
        samples = sa_sample(model, cfg)
        return schemas.SampleResponse(
            samples=[
                schemas.SampleRecord(
                    assignment=list(s.assignment),
                    energy=s.energy,
                    occurrences=s.occurrences,
                )
                for s in samples
            ]
        )

    return app
