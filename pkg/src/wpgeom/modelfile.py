"""TOML model files.

Exact data (``Q``, the nilpotent operators, the coefficients of ``A`` and
optional monodromy matrices) are written as integers or ``"p/q"`` strings;
floats there are parse errors.  Each coefficient record lists the real and
imaginary parts of ``A_alpha`` separately (``im`` may be omitted when zero).
``radius`` and ``base_point`` are geometric and may be floats.

Example::

    name = "elliptic"
    weight = 1
    rank = 2
    dim = 1
    punctures = 1
    radius = "1/2"
    base_point = [[0.0018674427317079893, 0.0]]
    Q = [[0, 1], [-1, 0]]
    nilpotents = [[[0, 0], [1, 0]]]

    [[coefficients]]
    powers = [0]
    re = [1, 0]
    im = [0, 0]

A record may instead give ``vector = [...]`` with ``[re, im]`` pairs for
Gaussian entries.
"""
from __future__ import annotations

import hashlib
import re
import sys
from dataclasses import dataclass
from fractions import Fraction

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10
    import tomli as tomllib

import tomli_w

from .errors import ModelFileError
from .model import VHSModel, qq_rows

_FLOAT_RE = re.compile(r"(?<![\w\"/.])[-+]?(\d[\d_]*\.\d*|\.\d+|\d+(\.\d*)?[eE][-+]?\d+|inf|nan)")


@dataclass
class ModelFile:
    model: VHSModel
    monodromies: list | None
    sha256: str
    path: str | None
    text: str


def _locate(text: str, path: list):
    """Best-effort (line, column) of the first float below ``path`` in the TOML text."""
    lines = text.splitlines()
    start = 0
    key = None
    for part in path:
        if isinstance(part, str):
            key = part
    if len(path) >= 2 and path[0] == "coefficients" and isinstance(path[1], int):
        headers = [i for i, ln in enumerate(lines) if ln.strip().startswith("[[coefficients]]")]
        if path[1] < len(headers):
            start = headers[path[1]]
        key = path[2] if len(path) > 2 and isinstance(path[2], str) else key
    for i in range(start, len(lines)):
        ln = lines[i]
        if key is not None and re.match(rf"\s*{re.escape(key)}\s*=", ln):
            for j in range(i, len(lines)):
                seg = lines[j] if j > i else ln[ln.index("=") + 1:]
                offset = 0 if j > i else ln.index("=") + 1
                m = _FLOAT_RE.search(seg.split("#")[0])
                if m:
                    return j + 1, offset + m.start() + 1
                if j > i and re.match(r"\s*[\w\"]+\s*=", lines[j]):
                    break
            return i + 1, 1
    return None, None


def _key_line(text, key):
    for i, ln in enumerate(text.splitlines()):
        if re.match(rf"\s*{re.escape(key)}\s*=", ln):
            return i + 1
    return None


def _path_str(path):
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (("." if out else "") + p)
    return out


def _reject_floats(obj, path, text):
    if isinstance(obj, float):
        line, col = _locate(text, path)
        raise ModelFileError(f"float entry {obj!r} in exact field {_path_str(path)}; write it as 'p/q'",
                             field=_path_str(path), line=line, column=col)
    if isinstance(obj, list):
        for i, x in enumerate(obj):
            _reject_floats(x, path + [i], text)
    if isinstance(obj, dict):
        for k, x in obj.items():
            _reject_floats(x, path + [k], text)


def _scalar(x):
    if isinstance(x, list):
        if len(x) != 2:
            raise ValueError("Gaussian entries are [re, im] pairs")
        return (x[0], x[1])
    return x


def _point(raw, field, text):
    out = []
    for i, c in enumerate(raw):
        if isinstance(c, list) and len(c) == 2:
            out.append(complex(float(Fraction(str(c[0])) if isinstance(c[0], str) else c[0]),
                               float(Fraction(str(c[1])) if isinstance(c[1], str) else c[1])))
        elif isinstance(c, (int, float)):
            out.append(complex(c))
        elif isinstance(c, str):
            out.append(complex(float(Fraction(c))))
        else:
            raise ModelFileError(f"cannot read {field}[{i}]", field=f"{field}[{i}]")
    return tuple(out)


def parse_model_text(text: str, path: str | None = None) -> ModelFile:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        col = getattr(exc, "colno", None)
        if line is None:
            m = re.search(r"line (\d+), column (\d+)", str(exc))
            line, col = (int(m.group(1)), int(m.group(2))) if m else (None, None)
        raise ModelFileError(f"TOML syntax error: {exc}", field=None, line=line, column=col) from exc
    for req in ("weight", "Q", "nilpotents", "coefficients", "radius", "base_point"):
        if req not in data:
            raise ModelFileError(f"missing field {req}", field=req)
    for exact in ("Q", "nilpotents", "coefficients", "monodromies", "weight", "known_order", "punctures",
                  "rank", "dim"):
        if exact in data:
            _reject_floats(data[exact], [exact], text)
    coeffs = {}
    for i, entry in enumerate(data["coefficients"]):
        if "powers" not in entry or not ("re" in entry or "vector" in entry):
            raise ModelFileError(f"coefficients[{i}] needs powers and re (or vector)",
                                 field=f"coefficients[{i}]")
        if "vector" in entry:
            vec = tuple(_scalar(v) for v in entry["vector"])
        else:
            re_ = entry["re"]
            im_ = entry.get("im", [0] * len(re_))
            if len(im_) != len(re_):
                raise ModelFileError(f"coefficients[{i}]: re and im differ in length",
                                     field=f"coefficients[{i}].im")
            vec = tuple(zip(re_, im_))
        key = tuple(entry["powers"])
        if key in coeffs:
            raise ModelFileError(f"coefficients[{i}]: duplicate powers {list(key)}",
                                 field=f"coefficients[{i}].powers")
        coeffs[key] = vec
    radius = data["radius"]
    radius = Fraction(radius) if isinstance(radius, str) else radius
    try:
        model = VHSModel.from_data(
            weight=data["weight"], Q=data["Q"], nilpotents=data["nilpotents"], coefficients=coeffs,
            radius=radius, base_point=_point(data["base_point"], "base_point", text),
            punctures=data.get("punctures"), pairing_sign=data.get("pairing_sign"),
            known_order=data.get("known_order"), name=data.get("name", ""))
    except (TypeError, ValueError) as exc:
        raise ModelFileError(f"invalid model data: {exc}", field=None) from exc
    for fld, actual in (("rank", model.rank), ("dim", model.dim)):
        if fld in data and data[fld] != actual:
            raise ModelFileError(f"{fld} = {data[fld]} but the data imply {actual}", field=fld,
                                 line=_key_line(text, fld))
    monos = data.get("monodromies")
    return ModelFile(model, monos, hashlib.sha256(text.encode()).hexdigest(), path, text)


def load_model(path) -> ModelFile:
    with open(path, "rb") as fh:
        raw = fh.read()
    return parse_model_text(raw.decode("utf-8"), str(path))


def _exact(x):
    f = Fraction(x)
    return f.numerator if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def _parts(c):
    return (Fraction(int(c.x.numerator), int(c.x.denominator)),
            Fraction(int(c.y.numerator), int(c.y.denominator)))


def _radius_out(r):
    f = Fraction(r)
    return _exact(f) if f.denominator <= 10 ** 6 else float(r)


def model_to_dict(model: VHSModel, monodromies=None) -> dict:
    coeffs = []
    for key, vec in sorted(model.holomorphic_part.items(), key=lambda kv: kv[0]):
        parts = [_parts(c) for c in vec]
        rec = {"powers": list(key[0]), "re": [_exact(a) for a, _ in parts]}
        if any(b for _, b in parts):
            rec["im"] = [_exact(b) for _, b in parts]
        coeffs.append(rec)
    out = {
        "name": model.name,
        "weight": model.weight,
        "rank": model.rank,
        "dim": model.dim,
        "punctures": model.punctures,
        "radius": _radius_out(model.radius),
        "base_point": [[z.real, z.imag] for z in model.base_point],
        "pairing_sign": model.pairing_sign,
        "Q": [[_exact(x) for x in r] for r in qq_rows(model.polarization.matrix)],
        "nilpotents": [[[_exact(x) for x in r] for r in qq_rows(N)] for N in model.nilpotents.operators],
        "coefficients": coeffs,
    }
    if model.known_order is not None:
        out["known_order"] = model.known_order
    if monodromies is not None:
        out["monodromies"] = [[[_exact(x) for x in r] for r in qq_rows(T)] for T in monodromies]
    return out


def dump_model(model: VHSModel, path=None, monodromies=None) -> str:
    text = tomli_w.dumps(model_to_dict(model, monodromies))
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
