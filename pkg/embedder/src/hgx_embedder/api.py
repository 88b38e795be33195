"""Local HTTP endpoint serving single-request embeddings.

POST /embed takes a JSON request (kind, model, and the kind's payload) and
replies with the unit-norm vector.  Unknown models map to 400, bad crop
rectangles to 422, as do other malformed requests.
"""

from __future__ import annotations

import base64

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse

from .extract import EmbedderError, RectError, UnknownModelError, embed_one
from .features import model_dim


def create_app() -> FastAPI:
    app = FastAPI(title="hgx-embedder", openapi_url=None)

    @app.exception_handler(EmbedderError)
    async def _domain_error(request: Request, exc: EmbedderError):
        if isinstance(exc, UnknownModelError):
            code = 400
        elif isinstance(exc, RectError):
            code = 422
        else:
            code = 422
        return JSONResponse(status_code=code, content={"detail": str(exc)})

    @app.get("/models")
    def models():
        return {
            "models": [
                {"name": name, "dim": model_dim(name)}
                for name in ("primary_vision", "vision_language")
            ]
        }

    @app.post("/embed")
    def embed(body: dict = Body(...)):
        data = None
        if "bytes_b64" in body:
            try:
                data = base64.b64decode(body["bytes_b64"])
            except Exception:
                raise EmbedderError("bytes_b64 is not valid base64") from None
        try:
            vector = embed_one(
                body.get("kind", ""),
                body.get("model", ""),
                path=body.get("path"),
                data=data,
                rect=body.get("rect"),
                text=body.get("text"),
            )
        except OSError as exc:
            raise EmbedderError(f"cannot decode image: {exc}") from exc
        return {"model": body.get("model"), "dim": int(vector.size), "vector": vector.tolist()}

    return app
