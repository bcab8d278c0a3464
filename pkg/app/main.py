"""
FastAPI Application for SpeedupLab

HTTP surface over the library:
1. Lists and serves the bundled cost models
2. Computes speedup curves for a model and growth function
3. Classifies models as strongly, weakly or Amdahl-like parallel
4. Reports superlinearity thresholds and the FFT processor bound
5. Fits model constants from an uploaded measurement CSV
"""

import io
import logging
import math
from typing import Any, Dict, List, Optional, Union

from fastapi import FastAPI, File, Form, HTTPException, Query, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from speeduplab import __version__
from speeduplab.amdahl_core import speedup_from_fraction
from speeduplab.asymptotics import Schedule
from speeduplab.classifier import classification_to_dict, classify, geometric_grid
from speeduplab.config import configure_logging, get_settings
from speeduplab.errors import (
    ConfigurationError,
    DataError,
    ModelFileError,
    SpeedupLabError,
    UsageError,
)
from speeduplab.fitting import fit, get_template, model_from_fit, parse_measurements
from speeduplab.model_library import (
    BUNDLED_MODEL_NAMES,
    CostModel,
    default_family,
    growth_function,
    load_bundled_model,
    model_from_dict,
    model_speedup,
    model_to_dict,
)
from speeduplab.superlinear import (
    fft_superlinear_pmax,
    fft_superlinear_scan,
    superlinear_report,
    superlinear_threshold_approx,
    superlinear_threshold_exact,
)

logger = logging.getLogger(__name__)

MAX_CURVE_POINTS = 10_000

# Create FastAPI app
app = FastAPI(
    title="SpeedupLab",
    description="Speedup, exponent of parallelism and parallelism classification of cost models",
    version=__version__,
)

# Configure CORS
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


class SpeedupRequest(BaseModel):
    model: Optional[Union[str, Dict[str, Any]]] = Field(
        default=None, description="Bundled model name or inline model file"
    )
    fraction: Optional[float] = Field(default=None, description="Classical Amdahl model instead of a cost model")
    g: Optional[str] = Field(default=None, description="Growth expression n = g(p)")
    n: Optional[float] = Field(default=None, description="Fixed problem dimension")
    p_min: float = 2.0
    p_max: float = 2.0 ** 20
    points: int = Field(default=50, le=MAX_CURVE_POINTS, description=f"Grid size, at most {MAX_CURVE_POINTS}")


class ClassifyRequest(BaseModel):
    model: Union[str, Dict[str, Any]]
    family: Optional[List[str]] = None
    tol: Optional[float] = None


def _status_for(error: SpeedupLabError) -> int:
    if isinstance(error, (UsageError, ConfigurationError)):
        return 400
    return 422


def _fail(error: SpeedupLabError) -> HTTPException:
    logger.warning(f"[API] ✗ {type(error).__name__}: {error}")
    return HTTPException(status_code=_status_for(error), detail=str(error))


def _resolve(model: Union[str, Dict[str, Any]]) -> CostModel:
    # Only bundled names: the HTTP surface never opens server-side paths
    if isinstance(model, str):
        return load_bundled_model(model)
    return model_from_dict(model)


@app.on_event("startup")
async def startup_event():
    """Load settings and configure logging on startup"""
    try:
        settings = get_settings()
        configure_logging(settings.log_level)
        logger.info("Starting SpeedupLab API...")
        logger.info(f"✓ Schedule 2^{settings.schedule_min_exp}..2^{settings.schedule_max_exp}, "
                    f"tol={settings.limit_tol}")
        logger.info("=" * 60)
        logger.info("SpeedupLab API is ready!")
        logger.info("=" * 60)
    except ConfigurationError as e:
        logger.error(f"✗ Startup failed: {e}")
        raise


@app.get("/health")
async def health_check():
    """Health check endpoint"""
    settings = get_settings()
    return {
        "status": "healthy",
        "version": __version__,
        "schedule_min_exp": settings.schedule_min_exp,
        "schedule_max_exp": settings.schedule_max_exp,
        "limit_tol": settings.limit_tol,
    }


@app.get("/api/models")
async def list_models():
    """List the bundled cost models"""
    return {"models": list(BUNDLED_MODEL_NAMES), "count": len(BUNDLED_MODEL_NAMES)}


@app.get("/api/models/{name}")
async def get_model(name: str):
    """Get a bundled model in the model-file format"""
    if name not in BUNDLED_MODEL_NAMES:
        raise HTTPException(status_code=404, detail="Model not found")
    try:
        return model_to_dict(load_bundled_model(name))
    except ModelFileError as e:
        logger.error(f"[API] Bundled model {name!r} is broken: {e}")
        raise HTTPException(status_code=500, detail=str(e))


@app.post("/api/speedup")
def speedup_curve(request: SpeedupRequest):
    """
    Speedup on a geometric p-grid

    Either fraction (classical Amdahl law) or model plus exactly one of
    g and n.
    """
    try:
        if not (request.p_min > 1 and request.p_max > request.p_min and request.points >= 2):
            raise UsageError("need 1 < p_min < p_max and points >= 2")
        grid = geometric_grid(request.p_min, request.p_max, request.points)

        if request.fraction is not None:
            if request.model is not None or request.g is not None or request.n is not None:
                raise UsageError("fraction takes no model, g or n")
            if not 0 < request.fraction <= 1:
                raise UsageError("fraction must lie in (0, 1]")
            points = [{"p": p, "speedup": speedup_from_fraction(request.fraction, p)} for p in grid]
            return {"model": None, "fraction": request.fraction, "points": points}

        if request.model is None:
            raise UsageError("give a model or a fraction")
        if (request.g is None) == (request.n is None):
            raise UsageError("give exactly one of g and n")
        model = _resolve(request.model)
        if request.g is not None:
            growth = growth_function(request.g)
            points = [{"p": p, "speedup": model_speedup(model, p, growth(p))} for p in grid]
        else:
            points = [{"p": p, "speedup": model_speedup(model, p, request.n)} for p in grid]
        return {"model": model.name, "points": points}

    except ModelFileError as e:
        if isinstance(request.model, str):
            raise HTTPException(status_code=404, detail=str(e))
        raise _fail(e)
    except SpeedupLabError as e:
        raise _fail(e)


@app.post("/api/classify")
def classify_model(request: ClassifyRequest):
    """Classify a model over a growth family (same document as the CLI)"""
    try:
        model = _resolve(request.model)
        family = (tuple(growth_function(source) for source in request.family)
                  if request.family else default_family())
        tol = request.tol if request.tol is not None else get_settings().zero_tolerance
        result = classify(model, family, Schedule.default(), tol)
        logger.info(f"[API] ✓ Classified {model.name!r}: {result.verdict.value}")
        return {"model": model.name, **classification_to_dict(result)}
    except ModelFileError as e:
        if isinstance(request.model, str):
            raise HTTPException(status_code=404, detail=str(e))
        raise _fail(e)
    except SpeedupLabError as e:
        raise _fail(e)


@app.get("/api/superlinear")
async def superlinear(
    p: Optional[float] = Query(default=None, description="Processor count"),
    speedup: Optional[float] = Query(default=None, description="Measured speedup"),
    c: Optional[float] = Query(default=None, alias="C", description="FFT constant ratio A/B"),
    n: Optional[float] = Query(default=None, description="FFT problem dimension"),
):
    """Superlinearity thresholds for p, or the FFT processor bound for C and n"""
    try:
        if p is not None:
            if c is not None or n is not None:
                raise UsageError("p cannot be combined with C and n")
            if not (math.isfinite(p) and p > 1):
                raise UsageError(f"p must exceed 1, got {p!r}")
            document: Dict[str, Any] = {
                "p": p,
                "threshold_exact": superlinear_threshold_exact(p),
                "threshold_approx": superlinear_threshold_approx(p),
            }
            if speedup is not None:
                if not (math.isfinite(speedup) and speedup > 0):
                    raise UsageError("speedup must be positive")
                document["report"] = superlinear_report(speedup, p).to_dict()
            return document

        if c is None or n is None:
            raise UsageError("give p, or both C and n")
        if not (math.isfinite(c) and c > 0 and math.isfinite(n) and n >= 1):
            raise UsageError("need C > 0 and n >= 1")
        return {
            "C": c,
            "n": n,
            "p_bound": fft_superlinear_pmax(c, n),
            "p_max_integer": fft_superlinear_scan(c, n),
        }
    except SpeedupLabError as e:
        raise _fail(e)


@app.post("/api/fit")
def fit_measurements(
    template: str = Form(...),
    measurements: UploadFile = File(...),
    classify_result: bool = Form(default=False, alias="classify"),
    family: Optional[List[str]] = Form(default=None),
    tol: Optional[float] = Form(default=None),
):
    """
    Fit a template to an uploaded p,n,time_seconds CSV

    With classify set, the fitted model is classified as well.
    """
    try:
        content = measurements.file.read()
        logger.info(f"[API] Received {measurements.filename} ({len(content)} bytes)")
        try:
            text = content.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DataError(f"Measurement file is not UTF-8: {e}")

        tmpl = get_template(template)
        samples = parse_measurements(io.StringIO(text, newline=""))
        result = fit(tmpl, samples)
        document: Dict[str, Any] = {"fit": result.to_dict()}

        if classify_result:
            growths = (tuple(growth_function(source) for source in family)
                       if family else default_family())
            zero_tolerance = tol if tol is not None else get_settings().zero_tolerance
            classification = classify(model_from_fit(tmpl, result), growths,
                                      Schedule.default(), zero_tolerance)
            document["classification"] = classification_to_dict(classification)
        return document

    except DataError as e:
        logger.warning(f"[API] ✗ Measurement data rejected: {e}")
        raise HTTPException(status_code=422, detail=str(e))
    except SpeedupLabError as e:
        raise _fail(e)


if __name__ == "__main__":
    import uvicorn

    settings = get_settings()
    uvicorn.run(
        "app.main:app",
        host=settings.api_host,
        port=settings.api_port,
        reload=True,
        log_level=settings.log_level.lower(),
    )
