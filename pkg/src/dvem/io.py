"""Line-delimited JSON record formats, config files and CSV reports.

Every record file holds one JSON object per line. Field order on write is
fixed (see README), so identical inputs give byte-identical files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Iterator, Optional

import yaml

from .core import (
    Config,
    ConfigError,
    CorrespondenceRecord,
    DataError,
    ImageMeta,
    QueryMeta,
    element_key,
    validate_dataset,
)
from .evaluation import EvalConfig
from .locations import CandidateLocation
from .pipeline import QueryData, QueryResult, RankedLocation

QUERIES = "queries.jsonl"
IMAGES = "images.jsonl"
CORRESPONDENCES = "correspondences.jsonl"


@dataclass(frozen=True)
class DatasetPaths:
    queries: Path
    images: Path
    correspondences: Path

    @classmethod
    def in_dir(cls, d) -> "DatasetPaths":
        d = Path(d)
        return cls(d / QUERIES, d / IMAGES, d / CORRESPONDENCES)


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, allow_nan=False)


def _lines(path: Path) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: not valid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise DataError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, obj


def _field(obj, key, kind, where, required=True):
    v = obj.get(key)
    if v is None:
        if required:
            raise DataError(f"{where}: missing field {key!r}")
        return None
    if kind is str:
        return str(v)
    if kind is int:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v != int(v):
            raise DataError(f"{where}: field {key!r} must be an integer, got {v!r}")
        return int(v)
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise DataError(f"{where}: field {key!r} must be a finite number, got {v!r}")
    return float(v)


def parse_query(obj: dict, where: str) -> QueryMeta:
    return QueryMeta(
        _field(obj, "query_id", str, where),
        _field(obj, "width", int, where),
        _field(obj, "height", int, where),
        _field(obj, "truth_label", str, where, False),
        _field(obj, "truth_lat", float, where, False),
        _field(obj, "truth_lon", float, where, False),
    )


def parse_image(obj: dict, where: str) -> ImageMeta:
    return ImageMeta(
        _field(obj, "query_id", str, where),
        _field(obj, "image_id", str, where),
        _field(obj, "rank", int, where),
        _field(obj, "similarity", float, where, False),
        _field(obj, "lat", float, where, False),
        _field(obj, "lon", float, where, False),
        _field(obj, "label", str, where, False),
    )


def parse_correspondence(obj: dict, where: str) -> CorrespondenceRecord:
    x, y = element_key(_field(obj, "x", float, where), _field(obj, "y", float, where))
    return CorrespondenceRecord(
        _field(obj, "query_id", str, where),
        x,
        y,
        _field(obj, "image_id", str, where),
        _field(obj, "ini_score", float, where),
    )


def query_to_dict(q: QueryMeta) -> dict:
    d = {"query_id": q.query_id, "width": q.width, "height": q.height}
    if q.truth_label is not None:
        d["truth_label"] = q.truth_label
    if q.truth_lat is not None:
        d["truth_lat"] = q.truth_lat
        d["truth_lon"] = q.truth_lon
    return d


def image_to_dict(im: ImageMeta) -> dict:
    d = {"query_id": im.query_id, "image_id": im.image_id, "rank": im.retrieval_rank}
    if im.retrieval_similarity is not None:
        d["similarity"] = im.retrieval_similarity
    if im.lat is not None:
        d["lat"] = im.lat
        d["lon"] = im.lon
    if im.label is not None:
        d["label"] = im.label
    return d


def correspondence_to_dict(c: CorrespondenceRecord) -> dict:
    return {"query_id": c.query_id, "image_id": c.image_id, "x": c.x, "y": c.y, "ini_score": c.ini_score}


def _raise_report(report, where: str) -> None:
    if not report.accepted:
        shown = "; ".join(f"{v.kind}: {v.detail}" for v in report.violations[:10])
        more = len(report.violations) - 10
        raise DataError(f"{where}: validation failed: {shown}" + (f" (+{more} more)" if more > 0 else ""))


def load(paths: DatasetPaths) -> list[QueryData]:
    """Read, cross-check and validate a whole dataset; queries keep file order."""
    queries: dict[str, QueryMeta] = {}
    for lineno, obj in _lines(paths.queries):
        where = f"{paths.queries}:{lineno}"
        q = parse_query(obj, where)
        if q.query_id in queries:
            raise DataError(f"{where}: duplicate query_id {q.query_id!r}")
        queries[q.query_id] = q

    images: dict[str, list[ImageMeta]] = {qid: [] for qid in queries}
    listed = set()
    for lineno, obj in _lines(paths.images):
        where = f"{paths.images}:{lineno}"
        im = parse_image(obj, where)
        if im.query_id not in queries:
            raise DataError(f"{where}: unknown query_id {im.query_id!r}")
        images[im.query_id].append(im)
        listed.add((im.query_id, im.image_id))

    corr: dict[str, list[CorrespondenceRecord]] = {qid: [] for qid in queries}
    for lineno, obj in _lines(paths.correspondences):
        where = f"{paths.correspondences}:{lineno}"
        c = parse_correspondence(obj, where)
        if c.query_id not in queries:
            raise DataError(f"{where}: unknown query_id {c.query_id!r}")
        if (c.query_id, c.image_id) not in listed:
            raise DataError(f"{where}: unknown image_id {c.image_id!r} for query {c.query_id!r}")
        corr[c.query_id].append(c)

    report = validate_dataset(
        queries.values(),
        (im for ims in images.values() for im in ims),
        (c for cs in corr.values() for c in cs),
    )
    _raise_report(report, str(paths.queries.parent))
    return [
        QueryData(q, tuple(sorted(images[qid], key=lambda im: im.retrieval_rank)), tuple(corr[qid]))
        for qid, q in queries.items()
    ]


class _GroupedReader:
    """Hands out consecutive runs of records sharing a query_id."""

    def __init__(self, path: Path, parse):
        self._path = path
        self._it = ((n, parse(o, f"{path}:{n}")) for n, o in _lines(path))
        self._next = next(self._it, None)
        self._done: set[str] = set()

    def take(self, qid: str) -> list:
        out = []
        while self._next is not None and self._next[1].query_id == qid:
            out.append(self._next[1])
            self._next = next(self._it, None)
        self._done.add(qid)
        if self._next is not None and self._next[1].query_id in self._done:
            n, rec = self._next
            raise DataError(f"{self._path}:{n}: records for query {rec.query_id!r} are not contiguous")
        return out

    def finish(self) -> None:
        if self._next is not None:
            n, rec = self._next
            raise DataError(
                f"{self._path}:{n}: query {rec.query_id!r} is unknown or out of order with the queries file"
            )


def stream(paths: DatasetPaths) -> Iterator[QueryData]:
    """Yield one validated query at a time.

    Image and correspondence files must list each query's records
    contiguously and in the same query order as the queries file, which is
    what :func:`write_dataset` produces. Only one query's records are held in
    memory.
    """
    imgs = _GroupedReader(paths.images, parse_image)
    corrs = _GroupedReader(paths.correspondences, parse_correspondence)
    seen = set()
    for lineno, obj in _lines(paths.queries):
        where = f"{paths.queries}:{lineno}"
        q = parse_query(obj, where)
        if q.query_id in seen:
            raise DataError(f"{where}: duplicate query_id {q.query_id!r}")
        seen.add(q.query_id)
        images = imgs.take(q.query_id)
        cs = corrs.take(q.query_id)
        _raise_report(validate_dataset([q], images, cs), where)
        yield QueryData(q, tuple(sorted(images, key=lambda im: im.retrieval_rank)), tuple(cs))
    imgs.finish()
    corrs.finish()


def write_dataset(out_dir, data: Iterable[QueryData]) -> DatasetPaths:
    paths = DatasetPaths.in_dir(out_dir)
    paths.queries.parent.mkdir(parents=True, exist_ok=True)
    with open(paths.queries, "w", encoding="utf-8") as fq, open(paths.images, "w", encoding="utf-8") as fi, open(
        paths.correspondences, "w", encoding="utf-8"
    ) as fc:
        for d in data:
            fq.write(_dumps(query_to_dict(d.query)) + "\n")
            for im in d.images:
                fi.write(_dumps(image_to_dict(im)) + "\n")
            for c in d.correspondences:
                fc.write(_dumps(correspondence_to_dict(c)) + "\n")
    return paths


def result_to_dict(r: QueryResult) -> dict:
    return {
        "query_id": r.query_id,
        "method": r.method,
        "estimate": r.ranked[0].location_id if r.ranked else None,
        "ranked": [
            {
                "location_id": loc.location_id,
                "score": loc.score,
                "k": loc.k,
                "centroid": list(loc.centroid) if loc.centroid is not None else None,
                "labels": list(loc.labels),
            }
            for loc in r.ranked
        ],
    }


def result_from_dict(d: dict) -> QueryResult:
    ranked = tuple(
        RankedLocation(
            e["location_id"],
            e["score"],
            e.get("k"),
            tuple(e["centroid"]) if e.get("centroid") is not None else None,
            tuple(e.get("labels", ())),
        )
        for e in d["ranked"]
    )
    return QueryResult(d["query_id"], d["method"], ranked)


def write_rankings(fh: IO[str], results: Iterable[QueryResult]) -> None:
    for r in results:
        fh.write(_dumps(result_to_dict(r)) + "\n")


def read_rankings(path) -> Iterator[QueryResult]:
    for lineno, obj in _lines(Path(path)):
        try:
            yield result_from_dict(obj)
        except (KeyError, TypeError) as exc:
            raise DataError(f"{path}:{lineno}: malformed ranking record ({exc})") from None


def write_rankings_csv(fh: IO[str], results: Iterable[QueryResult], header: bool = True) -> None:
    if header:
        fh.write("query_id,method,rank,location_id,score,k\n")
    for r in results:
        for i, loc in enumerate(r.ranked, start=1):
            k = "" if loc.k is None else loc.k
            fh.write(f"{r.query_id},{r.method},{i},{loc.location_id},{loc.score!r},{k}\n")


def location_to_dict(qid: str, loc: CandidateLocation) -> dict:
    return {
        "query_id": qid,
        "location_id": loc.location_id,
        "members": list(loc.members),
        "centroid": list(loc.centroid) if loc.centroid is not None else None,
        "label": loc.label,
        "labels": sorted(loc.labels),
    }


EVAL_KEYS = {"protocol", "r_eval_km", "k_values"}


def load_config(path: Optional[Path] = None, profile: Optional[str] = None, **overrides) -> tuple[Config, EvalConfig]:
    """Engine and evaluation settings from an optional YAML file.

    Precedence, lowest first: built-in defaults, ``profile`` preset, the file,
    then non-None ``overrides``.
    """
    raw: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = yaml.safe_load(fh) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: expected a mapping at top level")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    if profile is not None:
        raw["profile"] = profile
    eval_raw = {k: raw.pop(k) for k in list(raw) if k in EVAL_KEYS}
    if "k_values" in eval_raw:
        eval_raw["k_values"] = tuple(eval_raw["k_values"])
    try:
        return Config.from_dict(raw), EvalConfig(**eval_raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
