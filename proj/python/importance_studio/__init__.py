"""Visual importance tools for vector graphic designs.

Designs are accepted as dicts or JSON strings in the same schema the CLI and
HTTP service use. Maps are returned as float64 numpy arrays of shape (h, w).
"""

import json
import os

from . import _core
from ._core import ImpError

__all__ = [
    "ImpError",
    "build_annotation_maps",
    "canonical_json",
    "classify",
    "content_hash",
    "element_scores",
    "error_code",
    "evaluate",
    "optimize",
    "predict",
    "reflow",
    "rle_decode",
    "rle_encode",
    "template_dir",
]

rle_encode = _core.rle_encode
rle_decode = _core.rle_decode
evaluate = _core.evaluate


def _text(design):
    return design if isinstance(design, str) else json.dumps(design)


def _config(cfg):
    if cfg is None:
        return ""
    return cfg if isinstance(cfg, str) else json.dumps(cfg)


def error_code(exc):
    """The library error name carried by an ImpError, e.g. 'InvalidDesign'."""
    return exc.args[1] if len(exc.args) > 1 else None


def template_dir():
    """Directory of the shipped reflow templates."""
    env = os.environ.get("IMP_TEMPLATE_DIR")
    if env:
        return env
    return os.path.join(os.path.dirname(__file__), "templates")


def canonical_json(design, lenient=False):
    return _core.canonical_json(_text(design), lenient)


def content_hash(design):
    return _core.content_hash(_text(design))


def classify(design):
    """Returns (class name, {class name: probability})."""
    return _core.classify(_text(design))


def predict(design, config=None):
    return _core.predict(_text(design), _config(config))


def element_scores(importance_map, design):
    return _core.element_scores(importance_map, _text(design))


def optimize(design, targets, ga_config=None, predictor_config=None):
    """Runs the layout search. Returns (best design, fitness report, history)."""
    best, report, history = _core.optimize(
        _text(design), dict(targets), _config(ga_config), _config(predictor_config))
    return json.loads(best), json.loads(report), json.loads(history)


def reflow(design, width, height, templates=None, group_overflow=False, predictor_config=None):
    out = _core.reflow(_text(design), float(width), float(height), templates or template_dir(),
                       group_overflow, _config(predictor_config))
    return json.loads(out)


def build_annotation_maps(masks_path, sentinel_dir, min_annotators=25):
    """Returns ({design id: map}, report dict)."""
    maps, report = _core.build_annotation_maps(str(masks_path), str(sentinel_dir), min_annotators)
    return maps, json.loads(report)
