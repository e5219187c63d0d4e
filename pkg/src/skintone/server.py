"""HTTP backend for the annotation interface.

Serves the REST API the browser UI consumes plus the static UI bundle.
Assignment hands each annotator the next individual they have not labeled
yet, skipping individuals currently on another annotator's screen, so
concurrent annotators work on disjoint individuals. Labels append to a
crash-safe JSONL sink; every mutation is serialized through one lock.
"""

import threading
import time
from pathlib import Path

from fastapi import FastAPI, Response
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .data import (LabelRecord, MST_MAX, MST_MIN, append_label,
                   load_label_file)

IMAGE_MEDIA_TYPES = {".png": "image/png", ".jpg": "image/jpeg",
                     ".jpeg": "image/jpeg"}


class DuplicateLabelError(ValueError):
    pass


class UnknownIndividualError(ValueError):
    pass


def build_pool(manifest, stratified=None, seed=0):
    """Assignment pool of individual ids.

    Default: every individual, in a seeded shuffle. With stratified=N, picks
    N individuals per MST class from the already-labeled manifest (the
    validation-subset protocol) and interleaves the classes.
    """
    import numpy as np

    rng = np.random.default_rng(seed)
    if stratified is None:
        ids = sorted(manifest.individuals)
        return [ids[i] for i in rng.permutation(len(ids))]
    groups = {}
    for ind_id in sorted(manifest.individuals):
        label = manifest.individuals[ind_id].label
        if label is not None:
            groups.setdefault(label, []).append(ind_id)
    pool = []
    picked = {}
    for cls in sorted(groups):
        members = groups[cls]
        if len(members) < stratified:
            raise ValueError(f"class {cls} has {len(members)} labeled "
                             f"individuals, need {stratified}")
        picked[cls] = [members[i] for i in rng.permutation(len(members))[:stratified]]
    for i in range(stratified):
        for cls in sorted(picked):
            pool.append(picked[cls][i])
    return pool


class AnnotationService:
    """Assignment queue + label sink shared by all request handlers."""

    def __init__(self, manifest, sink_path, pool=None, seed=0):
        self.manifest = manifest
        self.sink_path = Path(sink_path)
        self.pool = pool if pool is not None else build_pool(manifest, seed=seed)
        self._lock = threading.Lock()
        self._completed = {}    # annotator -> set of individual ids
        self._checked_out = {}  # individual id -> annotator
        if self.sink_path.exists():
            for rec in load_label_file(self.sink_path):
                self._completed.setdefault(rec.annotator_id, set()).add(
                    rec.individual_id)

    def next_for(self, annotator):
        """Next individual for this annotator, or None when they are done.

        Re-polling without submitting returns the same individual. An
        individual checked out to another annotator is served only when it is
        the requester's sole remaining work (keeps every annotator live).
        """
        with self._lock:
            done = self._completed.setdefault(annotator, set())
            for ind, holder in self._checked_out.items():
                if holder == annotator:
                    return ind
            fallback = None
            for ind in self.pool:
                if ind in done:
                    continue
                if ind in self._checked_out:
                    fallback = fallback or ind
                    continue
                self._checked_out[ind] = annotator
                return ind
            return fallback

    def submit(self, individual_id, annotator_id, label):
        """Validate and persist one label; returns the stored record."""
        label_int = int(label)
        if label_int != label or not MST_MIN <= label_int <= MST_MAX:
            raise ValueError(f"label must be an integer in "
                             f"{MST_MIN}..{MST_MAX}, got {label!r}")
        with self._lock:
            if individual_id not in self.manifest.individuals:
                raise UnknownIndividualError(
                    f"unknown individual {individual_id!r}")
            done = self._completed.setdefault(annotator_id, set())
            if individual_id in done:
                raise DuplicateLabelError(
                    f"annotator {annotator_id!r} already labeled "
                    f"{individual_id!r}")
            record = LabelRecord(individual_id=individual_id,
                                 annotator_id=annotator_id, label=label_int,
                                 timestamp=int(time.time()))
            append_label(self.sink_path, record)
            done.add(individual_id)
            if self._checked_out.get(individual_id) == annotator_id:
                del self._checked_out[individual_id]
            return record

    def progress(self, annotator):
        with self._lock:
            done = self._completed.get(annotator, set())
            in_pool = sum(1 for ind in self.pool if ind in done)
            return {"assigned": len(self.pool), "completed": in_pool}


class LabelSubmission(BaseModel):
    individual_id: str
    annotator_id: str
    label: int


def create_app(service, palette, guidance="", exemplar_dir=None, ui_dir=None,
               data_root=None):
    app = FastAPI(title="skin tone annotation backend")
    exemplar_dir = Path(exemplar_dir) if exemplar_dir else None

    @app.get("/api/individuals/next")
    def next_individual(annotator: str):
        ind_id = service.next_for(annotator)
        if ind_id is None:
            return Response(status_code=204)
        images = service.manifest.individuals[ind_id].image_ids
        return {"individual_id": ind_id,
                "image_urls": [f"/api/images/{img}" for img in images]}

    @app.get("/api/images/{image_id}")
    def image_bytes(image_id: str):
        record = service.manifest.images.get(image_id)
        if record is None:
            return JSONResponse({"detail": f"unknown image {image_id!r}"},
                                status_code=404)
        path = Path(record.path)
        if data_root is not None and not path.is_absolute():
            path = Path(data_root) / path
        if not path.exists():
            return JSONResponse({"detail": f"missing file for {image_id!r}"},
                                status_code=404)
        media = IMAGE_MEDIA_TYPES.get(path.suffix.lower(), "application/octet-stream")
        return FileResponse(path, media_type=media)

    @app.get("/api/exemplars")
    def exemplars():
        exemplar_images = {str(entry["mst"]): [] for entry in palette}
        if exemplar_dir is not None and exemplar_dir.exists():
            for entry in palette:
                tone_dir = exemplar_dir / str(entry["mst"])
                if tone_dir.is_dir():
                    exemplar_images[str(entry["mst"])] = [
                        f"/api/exemplars/images/{entry['mst']}/{p.name}"
                        for p in sorted(tone_dir.iterdir()) if p.is_file()]
        return {"swatches": palette, "exemplar_images": exemplar_images,
                "guidance": guidance}

    @app.get("/api/exemplars/images/{mst}/{name}")
    def exemplar_image(mst: int, name: str):
        if exemplar_dir is None:
            return JSONResponse({"detail": "no exemplar assets configured"},
                                status_code=404)
        path = (exemplar_dir / str(mst) / name).resolve()
        if not str(path).startswith(str(exemplar_dir.resolve())) or not path.exists():
            return JSONResponse({"detail": "not found"}, status_code=404)
        media = IMAGE_MEDIA_TYPES.get(path.suffix.lower(), "application/octet-stream")
        return FileResponse(path, media_type=media)

    @app.post("/api/labels", status_code=201)
    def post_label(submission: LabelSubmission):
        try:
            record = service.submit(submission.individual_id,
                                    submission.annotator_id, submission.label)
        except DuplicateLabelError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=409)
        except (UnknownIndividualError, ValueError) as exc:
            return JSONResponse({"detail": str(exc)}, status_code=422)
        return {"individual_id": record.individual_id,
                "annotator_id": record.annotator_id, "label": record.label}

    @app.get("/api/progress")
    def progress(annotator: str):
        return service.progress(annotator)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")
    return app


def serve(config, manifest, palette):
    """Build the app from a ToolkitConfig and run it under uvicorn."""
    import uvicorn

    pool = build_pool(manifest, stratified=config.server.stratified,
                      seed=config.server.seed)
    service = AnnotationService(manifest, config.server.label_sink, pool=pool)
    app = create_app(service, palette, guidance=config.server.guidance,
                     exemplar_dir=config.server.exemplar_dir,
                     ui_dir=config.server.ui_dir, data_root=config.data_root)
    uvicorn.run(app, host="127.0.0.1", port=config.server.port)
