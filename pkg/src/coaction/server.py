"""HTTP inference API and static explorer UI.

All endpoints are read-only over an immutable loaded checkpoint:
  GET  /api/tasks          registered tasks with dimensions and bounds
  POST /api/infer          {"task": id, "theta": [..]} -> lambda/x/f
  GET  /api/front/{id}?k=  evaluation-grid solutions {theta, f_norm}
  GET  /api/metrics/{id}   filtered HV / range / sparsity report
Unknown tasks give 404 and invalid inputs 400, always as {"error": ...}.
"""

import os

from fastapi import FastAPI, Request
from fastapi.responses import FileResponse, HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .model import Checkpoint
from .trainer import evaluate_quality, infer_point, solutions_on_grid

FALLBACK_PAGE = """<!doctype html>
<html><head><title>coaction</title></head>
<body><h1>coaction inference service</h1>
<p>No UI build found. API endpoints:</p>
<ul><li>GET /api/tasks</li><li>POST /api/infer</li>
<li>GET /api/front/{id}?k=100</li><li>GET /api/metrics/{id}</li></ul>
</body></html>"""


def create_app(checkpoint: Checkpoint, ui_dir: str = None) -> FastAPI:
    app = FastAPI(title="coaction", docs_url=None, redoc_url=None)
    task_ids = [t.id for t in checkpoint.config.tasks]
    metrics_cache: dict = {}

    def error(status: int, message: str) -> JSONResponse:
        return JSONResponse({"error": message}, status_code=status)

    @app.get("/api/tasks")
    def tasks():
        return [{"id": t.id, "m": t.m, "n": t.n,
                 "lower": t.lower.tolist(), "upper": t.upper.tolist()}
                for t in checkpoint.config.tasks]

    @app.post("/api/infer")
    async def infer(request: Request):
        try:
            body = await request.json()
        except Exception:
            return error(400, "request body is not valid JSON")
        if not isinstance(body, dict) or "task" not in body or "theta" not in body:
            return error(400, "body must be {'task': id, 'theta': [values]}")
        task_id = body["task"]
        if task_id not in task_ids:
            return error(404, f"unknown task '{task_id}'")
        theta = body["theta"]
        if not isinstance(theta, list) or \
                not all(isinstance(v, (int, float)) for v in theta):
            return error(400, "theta must be a list of numbers")
        try:
            return infer_point(checkpoint, task_id, theta)
        except ValueError as err:
            return error(400, str(err))

    @app.get("/api/front/{task_id}")
    def front(task_id: str, k: int = 100):
        if task_id not in task_ids:
            return error(404, f"unknown task '{task_id}'")
        if k < 2 or k > 10000:
            return error(400, "k must be in [2, 10000]")
        sols = solutions_on_grid(checkpoint, task_id, k)
        return {"task": task_id,
                "points": [{"theta": sols.thetas[i].tolist(),
                            "f_norm": sols.fs[i].tolist()}
                           for i in range(len(sols.fs))]}

    @app.get("/api/metrics/{task_id}")
    def metrics(task_id: str):
        if task_id not in task_ids:
            return error(404, f"unknown task '{task_id}'")
        if task_id not in metrics_cache:
            evals = evaluate_quality(checkpoint, eval_points=100)
            metrics_cache.update({tid: ev.report.to_dict()
                                  for tid, ev in evals.items()})
        return metrics_cache[task_id]

    if ui_dir and os.path.isdir(ui_dir):
        index = os.path.join(ui_dir, "index.html")

        @app.get("/", include_in_schema=False)
        def root():
            if os.path.isfile(index):
                return FileResponse(index)
            return HTMLResponse(FALLBACK_PAGE)

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    else:
        @app.get("/", include_in_schema=False)
        def root_fallback():
            return HTMLResponse(FALLBACK_PAGE)

    return app
