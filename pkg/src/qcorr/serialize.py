"""JSON schemas for operators and instruments; CSV number formatting."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .quantum import Instrument, instrument


def operator_to_obj(m) -> dict:
    a = np.asarray(m, dtype=np.complex128)
    return {"dim": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}


def operator_from_obj(obj) -> np.ndarray:
    if isinstance(obj, list):  # bare real matrix
        a = np.asarray(obj, dtype=np.complex128)
    else:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        a = re + 1j * im
        if "dim" in obj and a.shape != (obj["dim"], obj["dim"]):
            raise ValueError(f"operator shape {a.shape} does not match dim {obj['dim']}")
    return a


def vector_from_obj(obj) -> np.ndarray:
    if isinstance(obj, dict):
        re = np.asarray(obj["re"], dtype=float)
        return re + 1j * np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    return np.asarray(obj, dtype=np.complex128)


def instrument_to_obj(inst: Instrument) -> dict:
    return {"outcomes": [{"label": lab, "kraus": [operator_to_obj(k) for k in ks]}
                         for lab, ks in zip(inst.labels, inst.kraus)]}


def instrument_from_obj(obj, tol=None) -> Instrument:
    return instrument([(o["label"], [operator_from_obj(k) for k in o["kraus"]])
                       for o in obj["outcomes"]], tol=tol)


def load_json(path) -> object:
    return json.loads(Path(path).read_text())


def load_operator(path) -> np.ndarray:
    return operator_from_obj(load_json(path))


def fmt(x) -> str:
    """17 significant digits, '.' decimal point, independent of locale."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")
