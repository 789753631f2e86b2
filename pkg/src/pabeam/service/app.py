"""FastAPI application wrapping the beamforming workflows."""

import base64
import dataclasses

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import PabeamError, UsageError
from ..config import apply_overrides, parse_config
from ..metrics import Roi
from .. import workflows as wf
from . import schemas as sc


def _b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def _unb64(text: str, what: str) -> bytes:
    try:
        return base64.b64decode(text.encode("ascii"), validate=True)
    except Exception as e:
        raise UsageError(f"{what} is not valid base64") from e


def _roi(model) -> Roi:
    return Roi(x_lo=model.x_lo, x_hi=model.x_hi, z_lo=model.z_lo, z_hi=model.z_hi)


def create_app() -> FastAPI:
    app = FastAPI(title="pabeam", version=__version__)

    @app.exception_handler(PabeamError)
    async def _pabeam_error(request: Request, exc: PabeamError):
        status = 422 if exc.kind == "usage" else 400
        return JSONResponse(status_code=status,
                            content={"error": str(exc), "kind": exc.kind})

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=422,
                            content={"error": str(exc), "kind": "usage"})

    @app.get("/v1/health", response_model=sc.HealthResponse)
    def health():
        return sc.HealthResponse(status="ok", service="pabeam", version=__version__)

    @app.post("/v1/simulate", response_model=sc.SimulateResponse)
    def simulate(req: sc.SimulateRequest):
        cfg = parse_config(req.config_text)
        if req.seed is not None:
            cfg = apply_overrides(cfg, seed=req.seed)
        res = wf.simulate_workflow(cfg)
        return sc.SimulateResponse(
            frame_b64=_b64(res.frame_bytes), sha256=res.sha256,
            num_elements=res.num_elements, num_samples=res.num_samples,
            sampling_freq_hz=res.sampling_freq, sound_speed_mps=res.sound_speed,
            truncated_targets=list(res.truncated_targets),
        )

    @app.post("/v1/beamform", response_model=sc.BeamformResponse)
    def beamform(req: sc.BeamformRequest):
        cfg = parse_config(req.config_text)
        cfg = apply_overrides(cfg, method=req.method, p=req.p,
                              apply_filter=req.apply_filter,
                              filter_lo=req.filter_lo_hz, filter_hi=req.filter_hi_hz,
                              dynamic_range_db=req.dynamic_range_db)
        res = wf.beamform_workflow(cfg, _unb64(req.frame_b64, "frame_b64"))
        return sc.BeamformResponse(
            method=res.method, p=res.p, nx=res.nx, nz=res.nz,
            raw_b64=_b64(res.stages["raw"]),
            filtered_b64=_b64(res.stages["filtered"]) if "filtered" in res.stages else None,
            envelope_b64=_b64(res.stages["envelope"]),
            log_b64=_b64(res.stages["log"]),
            pgm_b64=_b64(res.pgm),
        )

    @app.post("/v1/metrics", response_model=sc.MetricsResponse)
    def metrics(req: sc.MetricsRequest):
        cfg = parse_config(req.config_text)
        res = wf.metrics_workflow(
            cfg,
            _unb64(req.envelope_b64, "envelope_b64"),
            _unb64(req.log_b64, "log_b64"),
            target_rois=[_roi(r) for r in req.target_rois] if req.target_rois else None,
            noise_roi=_roi(req.noise_roi) if req.noise_roi else None,
            depths=req.depths_m,
            method=req.method, p=req.p,
        )
        return sc.MetricsResponse(
            metrics_csv=res.metrics_csv,
            profiles=[sc.ProfilePayload(depth_m=d, csv=c) for d, c in res.profiles],
        )

    @app.post("/v1/sweep", response_model=sc.SweepResponse)
    def sweep(req: sc.SweepRequest):
        cfg = parse_config(req.config_text)
        if req.seed is not None:
            cfg = apply_overrides(cfg, seed=req.seed)
        res = wf.sweep_workflow(
            cfg, req.p_list,
            frame_bytes=_unb64(req.frame_b64, "frame_b64") if req.frame_b64 else None,
            target_rois=[_roi(r) for r in req.target_rois] if req.target_rois else None,
            noise_roi=_roi(req.noise_roi) if req.noise_roi else None,
            depths=req.depths_m,
        )
        return sc.SweepResponse(
            items=[sc.SweepItemPayload(p=item.p, envelope_b64=_b64(item.envelope_paim),
                                       log_b64=_b64(item.log_paim), pgm_b64=_b64(item.pgm))
                   for item in res.items],
            metrics_csv=res.metrics_csv,
        )

    @app.post("/v1/bench", response_model=sc.BenchResponse)
    def bench(req: sc.BenchRequest):
        res = wf.bench_workflow(req.methods, req.element_counts, req.repeats,
                                req.seed, nx=req.nx, nz=req.nz, parallel=req.parallel)
        return sc.BenchResponse(
            results=[sc.BenchRow(**dataclasses.asdict(r)) for r in res.results],
            csv=res.csv,
        )

    return app
