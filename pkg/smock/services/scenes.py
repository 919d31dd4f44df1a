"""Scene ingestion - JSON text to a validated ``Scene``.

parse_scene performs, in order:
    1. JSON decoding (non-finite literals such as NaN or Infinity rejected)
    2. family-name lookup (UnknownFamily)
    3. seed check for Monte Carlo methods (MissingSeed); a top-level
       ``experiment.seed`` or the CLI ``--seed`` fills the method's seed
    4. schema validation (pydantic errors become SceneError path/message pairs)
    5. dimension agreement of every vector in the document (DimensionMismatch)
    6. validation of an explicit stitch listing (pattern errors propagate)
"""

import hashlib
import json
import logging
from typing import Any, List, Optional, Tuple

from pydantic import ValidationError

from smock.errors import DimensionMismatch, MissingSeed, SceneError, UnknownFamily
from smock.models.family import FAMILY_NAMES
from smock.models.pattern import SmockingPattern
from smock.models.scene import Scene
from smock.services.constructions import instantiate
from smock.services.smocked import validate_pattern

logger = logging.getLogger(__name__)


def _reject_constant(name: str):
    raise ValueError(f"non-finite number {name} is not allowed")


def _decode(text: str) -> Any:
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except ValueError as exc:
        raise SceneError([("", f"not valid JSON: {exc}")]) from exc


def scene_digest(text: str) -> str:
    """sha256 of the canonical form of the scene JSON."""
    canonical = json.dumps(_decode(text), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _check_family(doc: Any, path: str):
    if isinstance(doc, dict) and "name" in doc and doc["name"] not in FAMILY_NAMES:
        raise UnknownFamily(
            f"Unknown family '{doc['name']}' at {path} (known: {', '.join(FAMILY_NAMES)})",
            {"path": path},
        )


def _fill_seed(raw: dict, seed: Optional[int]):
    experiment = raw.get("experiment")
    if not isinstance(experiment, dict):
        return
    method = experiment.get("method")
    if not isinstance(method, dict) or method.get("kind") != "monte_carlo":
        return
    chosen = seed if seed is not None else method.get("seed", experiment.get("seed"))
    if chosen is None:
        raise MissingSeed("Monte Carlo integration requested without a seed", {"path": "experiment.method.seed"})
    method["seed"] = chosen
    experiment["seed"] = chosen


def _schema_errors(exc: ValidationError) -> List[Tuple[str, str]]:
    return [(".".join(str(p) for p in err["loc"]), err["msg"]) for err in exc.errors()]


def _vectors(scene: Scene):
    """(path, length) for every vector in the document that lives in E^N."""
    exp = scene.experiment
    if scene.pattern:
        for i, s in enumerate(scene.pattern):
            yield f"pattern.{i}", s.dimension
    if scene.family is not None:
        yield "family", scene.family.dimension
    if scene.window is not None:
        yield "window", scene.window.dimension
    if scene.basepoint is not None:
        yield "basepoint", len(scene.basepoint)
    if exp.center is not None:
        yield "experiment.center", len(exp.center)
    for i, (v, w) in enumerate(exp.pairs):
        yield f"experiment.pairs.{i}", len(v)
        yield f"experiment.pairs.{i}", len(w)
    for name in ("evaluation_window", "support_box"):
        box = getattr(exp, name)
        if box is not None:
            yield f"experiment.{name}", box.dimension
    for name in ("A", "B"):
        cs = getattr(exp, name)
        if cs is not None:
            yield f"experiment.{name}", cs.dimension
    if exp.limit is not None:
        yield "experiment.limit", exp.limit.dimension
    for i, phi in enumerate(exp.phis):
        if hasattr(phi, "center"):
            yield f"experiment.phis.{i}", len(phi.center)


def parse_scene(text: str, seed: Optional[int] = None) -> Scene:
    raw = _decode(text)
    if not isinstance(raw, dict):
        raise SceneError([("", "scene must be a JSON object")])
    _check_family(raw.get("family"), "family")
    if isinstance(raw.get("experiment"), dict):
        _check_family(raw["experiment"].get("limit"), "experiment.limit")
    _fill_seed(raw, seed)

    try:
        scene = Scene.model_validate(raw)
    except ValidationError as exc:
        raise SceneError(_schema_errors(exc)) from exc

    for path, n in _vectors(scene):
        if n != scene.dimension:
            raise DimensionMismatch(
                f"{path} has dimension {n}, scene dimension is {scene.dimension}", {"path": path}
            )
    if scene.experiment.sample_box is not None and scene.experiment.norm is not None:
        if scene.experiment.sample_box.dimension != len(scene.experiment.norm.generators[0]):
            raise DimensionMismatch("experiment.sample_box does not match the norm dimension")

    if scene.pattern is not None:
        explicit_pattern(scene)
    logger.debug("scene parsed: dimension %d", scene.dimension)
    return scene


def explicit_pattern(scene: Scene) -> SmockingPattern:
    return validate_pattern(scene.pattern, window=scene.window, dimension=scene.dimension)


def load_patterns(scene: Scene) -> List[Tuple[int, SmockingPattern]]:
    """(k, pattern) pairs: one row with k = 0 for an explicit listing, else one per k."""
    if scene.pattern is not None:
        return [(0, explicit_pattern(scene))]
    return [(k, instantiate(scene.family, k)) for k in sorted(scene.experiment.ks)]
