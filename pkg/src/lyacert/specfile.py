"""JSON problem files.

A file is an object with ``schema_version`` (currently 1), ``kind`` and
kind-specific fields. Matrix entries are addressed as ``"q_i_j"`` with
1-based indices; only the upper triangle is read and the lower one
mirrors it. Each entry is one of::

    {"fourier": [[cos_coeff, sin_coeff, harmonic], ...]}
    {"samples": [v_0, ..., v_{m-1}], "interpolation": "periodic_cubic"}

where harmonic ``k`` means ``cos(2 pi k t / T)``. Samples sit at
``t_j = j T / m``. Vector entries (forcing ``"h_i"``) use the same forms.

Kinds
-----
linear_system
    ``dim``, ``period``, ``matrix``; optional ``majorant`` (diagonal
    entries only), ``exponents``, ``forcing``, ``tolerances``.
nonlinear_system
    ``dim``, ``period``, ``nonlinearity`` (see :func:`build_nonlinear`),
    optional ``forcing``, ``exponents``, ``tolerances``, ``seeds``.
constants_query
    ``p`` (list), ``period``, ``bc`` (list).
witness_query
    ``witness`` (``instability`` or ``resonance``), ``gammas``, ``j``
    (1-based), ``p``, ``period``.
"""

import json
import math
import re

import numpy as np

from . import linear_engine as le
from .constants import PExponent
from .errors import DomainError

SCHEMA_VERSION = 1
KINDS = ("linear_system", "nonlinear_system", "constants_query", "witness_query")

_ENTRY = re.compile(r"^q_(\d+)_(\d+)$")
_FORCING = re.compile(r"^h_(\d+)$")


def load(path):
    """Read and validate a problem file; returns the parsed dict."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read spec file {path}: {exc}") from exc
    return validate(data)


def validate(data):
    if not isinstance(data, dict):
        raise DomainError("spec must be a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise DomainError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    kind = data.get("kind")
    if kind not in KINDS:
        raise DomainError(f"kind must be one of {', '.join(KINDS)}")
    if "period" in data:
        period = _number(data["period"], "period")
        if not period > 0:
            raise DomainError("period must be positive")
    if kind in ("linear_system", "nonlinear_system"):
        if "period" not in data:
            raise DomainError("period is required")
        dim = data.get("dim")
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            raise DomainError("dim must be a positive integer")
    return data


def _number(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DomainError(f"{what} must be a number")
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{what} must be finite")
    return value


def _entry_values(spec, what):
    """Return ('fourier', terms) or ('samples', array) for one entry."""
    if not isinstance(spec, dict):
        raise DomainError(f"{what}: entry must be an object")
    if "fourier" in spec:
        terms = []
        for term in spec["fourier"]:
            if len(term) != 3:
                raise DomainError(f"{what}: fourier terms are [cos, sin, harmonic]")
            a, b, k = term
            if isinstance(k, bool) or not isinstance(k, int) or k < 0:
                raise DomainError(f"{what}: harmonic must be a nonnegative integer")
            terms.append((_number(a, what), _number(b, what), k))
        return "fourier", terms
    if "samples" in spec:
        interp = spec.get("interpolation", "periodic_cubic")
        if interp != "periodic_cubic":
            raise DomainError(f"{what}: only periodic_cubic interpolation is supported")
        arr = np.asarray([_number(v, what) for v in spec["samples"]], dtype=float)
        if arr.size < 4:
            raise DomainError(f"{what}: need at least 4 samples")
        return "samples", arr
    raise DomainError(f"{what}: entry needs 'fourier' or 'samples'")


def _fourier_eval(terms, t, T):
    w = 2.0 * np.pi * np.asarray(t, dtype=float) / T
    out = np.zeros(np.shape(t))
    for a, b, k in terms:
        out = out + a * np.cos(k * w) + b * np.sin(k * w)
    return out


def scalar_function(spec, period, what="entry"):
    """Callable ``t -> values`` for a scalar entry."""
    kind, payload = _entry_values(spec, what)
    if kind == "fourier":
        return lambda t: _fourier_eval(payload, t, period)
    f = le.as_vector_function(payload, 1, period)
    return lambda t: f(t)[:, 0].reshape(np.shape(t))


def _index_entries(mapping, dim, what):
    entries = {}
    for key, value in mapping.items():
        m = _ENTRY.match(key)
        if not m:
            raise DomainError(f"{what}: bad entry name {key!r} (expected q_i_j)")
        i, j = int(m.group(1)) - 1, int(m.group(2)) - 1
        if not (0 <= i < dim and 0 <= j < dim):
            raise DomainError(f"{what}: entry {key} outside a {dim} x {dim} matrix")
        if i > j:
            # lower triangle is implied by symmetry
            continue
        entries[(i, j)] = _entry_values(value, f"{what}.{key}")
    return entries


def matrix_function(mapping, dim, period, what="matrix"):
    """Build a :class:`MatrixFunction` from ``{"q_i_j": entry}``."""
    if not isinstance(mapping, dict) or not mapping:
        raise DomainError(f"{what} must be a non-empty object")
    entries = _index_entries(mapping, dim, what)
    if all(kind == "fourier" for kind, _ in entries.values()):
        return le.MatrixFunction.from_fourier({ij: terms for ij, (_, terms) in entries.items()}, dim, period)
    sizes = {v.size for kind, v in entries.values() if kind == "samples"}
    if len(sizes) == 1 and all(kind == "samples" for kind, _ in entries.values()):
        m = sizes.pop()
        s = np.zeros((m, dim, dim))
        for (i, j), (_, v) in entries.items():
            s[:, i, j] = v
            s[:, j, i] = v
        return le.MatrixFunction.from_samples(s, period)
    # mixed representations: evaluate entry by entry
    funcs = {}
    for (i, j), (kind, payload) in entries.items():
        if kind == "fourier":
            funcs[(i, j)] = (lambda terms: lambda t: _fourier_eval(terms, t, period))(payload)
        else:
            f = le.as_vector_function(payload, 1, period)
            funcs[(i, j)] = (lambda f: lambda t: f(t)[:, 0])(f)

    def func(t):
        out = np.zeros((t.size, dim, dim))
        for (i, j), f in funcs.items():
            v = f(t)
            out[:, i, j] = v
            out[:, j, i] = v
        return out

    return le.MatrixFunction(func, dim, period)


def forcing_function(mapping, dim, period):
    """Callable ``t -> (len(t), n)`` from ``{"h_i": entry}``; missing components are zero."""
    if mapping is None:
        return None
    comps = {}
    for key, value in mapping.items():
        m = _FORCING.match(key)
        if not m:
            raise DomainError(f"forcing: bad component name {key!r} (expected h_i)")
        i = int(m.group(1)) - 1
        if not 0 <= i < dim:
            raise DomainError(f"forcing: component {key} out of range")
        comps[i] = scalar_function(value, period, f"forcing.{key}")

    def func(t):
        t = np.atleast_1d(t)
        out = np.zeros((t.size, dim))
        for i, f in comps.items():
            out[:, i] = f(t)
        return out

    return func


def parse_exponents(values, dim):
    if values is None:
        return None
    if len(values) != dim:
        raise DomainError("need one exponent per component")
    return [PExponent.parse(v) for v in values]


def linear_system(data):
    """``(P, B or None, exponents or None, forcing or None)`` from a linear_system spec."""
    if data.get("kind") != "linear_system":
        raise DomainError("expected a linear_system spec")
    dim, T = data["dim"], float(data["period"])
    P = matrix_function(data.get("matrix"), dim, T)
    B = None
    if data.get("majorant") is not None:
        B = matrix_function(data["majorant"], dim, T, "majorant")
    exps = parse_exponents(data.get("exponents"), dim)
    forcing = forcing_function(data.get("forcing"), dim, T)
    return P, B, exps, forcing


def build_weight(spec, period):
    """Scalar weight ``m(t)``: a Fourier/samples entry or ``{"von_mises": {...}}``.

    ``von_mises`` has ``height``, ``concentration`` and optional ``center``;
    it is ``height * exp(concentration * (cos(2 pi (t - center) / T) - 1))``,
    a smooth bump that narrows as the concentration grows.
    """
    if spec is None:
        return None
    if "von_mises" in spec:
        vm = spec["von_mises"]
        c = _number(vm["height"], "von_mises.height")
        k = _number(vm["concentration"], "von_mises.concentration")
        t0 = _number(vm.get("center", 0.0), "von_mises.center")
        if c < 0 or k < 0:
            raise DomainError("von_mises height and concentration must be nonnegative")
        return lambda t: c * np.exp(k * (np.cos(2.0 * np.pi * (np.asarray(t) - t0) / period) - 1.0))
    return scalar_function(spec, period, "weight")


def build_nonlinear(data):
    """``(NonlinearProblem, forcing)`` from a nonlinear_system spec.

    ``nonlinearity`` currently supports ``{"type": "quadratic_logcosh",
    "M": [[...]], "c": [...], "weight": entry}``, i.e.
    ``G = m(t) [<M u, u>/2 + sum c_i log cosh u_i]``.
    """
    from .resonant import logcosh_problem

    if data.get("kind") != "nonlinear_system":
        raise DomainError("expected a nonlinear_system spec")
    dim, T = data["dim"], float(data["period"])
    nl = data.get("nonlinearity") or {}
    if nl.get("type") != "quadratic_logcosh":
        raise DomainError("nonlinearity.type must be 'quadratic_logcosh'")
    M = np.asarray(nl.get("M"), dtype=float)
    if M.shape != (dim, dim):
        raise DomainError("nonlinearity.M must be dim x dim")
    c = nl.get("c")
    if c is not None and len(c) != dim:
        raise DomainError("nonlinearity.c must have dim entries")
    weight = build_weight(nl.get("weight"), T)
    if weight is not None and float(np.min(weight(np.linspace(0.0, T, 1025)))) < 0:
        raise DomainError("weight must be nonnegative")
    exps = parse_exponents(data.get("exponents"), dim)
    prob = logcosh_problem(M, c, weight, T, exps, data.get("name", "spec"))
    return prob, forcing_function(data.get("forcing"), dim, T)


# --- writing ------------------------------------------------------------------------


def _entry_json(kind, payload):
    if kind == "fourier":
        return {"fourier": [[float(a), float(b), int(k)] for a, b, k in payload]}
    return {"samples": [float(v) for v in payload], "interpolation": "periodic_cubic"}


def matrix_json(Q):
    """Serialize a MatrixFunction that knows its source representation."""
    if Q.source is None:
        raise DomainError("matrix function has no serializable representation")
    kind, payload = Q.source
    out = {}
    if kind == "fourier":
        for (i, j), terms in sorted(payload.items()):
            out[f"q_{i + 1}_{j + 1}"] = _entry_json("fourier", terms)
        return out
    s = np.asarray(payload)
    for i in range(Q.dim):
        for j in range(i, Q.dim):
            if np.any(s[:, i, j] != 0.0) or i == j:
                out[f"q_{i + 1}_{j + 1}"] = _entry_json("samples", s[:, i, j])
    return out


def forcing_json(samples):
    s = np.asarray(samples, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    return {f"h_{i + 1}": _entry_json("samples", s[:, i]) for i in range(s.shape[1]) if np.any(s[:, i] != 0.0)}


def linear_spec(Q, forcing=None, exponents=None, note=None):
    data = {"schema_version": SCHEMA_VERSION, "kind": "linear_system", "dim": Q.dim,
            "period": Q.period, "matrix": matrix_json(Q)}
    if exponents is not None:
        data["exponents"] = [str(p) for p in exponents]
    if forcing is not None:
        data["forcing"] = forcing_json(forcing)
    if note:
        data["note"] = note
    return data


def dumps(data):
    """Deterministic JSON text (floats round-trip exactly via repr)."""
    return json.dumps(data, indent=2) + "\n"


# --- sweep templates ----------------------------------------------------------------------

_PLACEHOLDER = re.compile(r"^\s*(?:([-+]?[0-9.eE+-]+)\s*\*\s*)?(-)?\$([A-Za-z_][A-Za-z0-9_]*)\s*$")


def substitute(template, values):
    """Replace ``"$name"``, ``"-$name"`` and ``"k*$name"`` strings with numbers."""
    if isinstance(template, dict):
        return {k: substitute(v, values) for k, v in template.items()}
    if isinstance(template, list):
        return [substitute(v, values) for v in template]
    if isinstance(template, str) and "$" in template:
        m = _PLACEHOLDER.match(template)
        if not m:
            raise DomainError(f"cannot parse placeholder {template!r}")
        factor = float(m.group(1)) if m.group(1) else 1.0
        if m.group(2):
            factor = -factor
        name = m.group(3)
        if name not in values:
            raise DomainError(f"template uses ${name} but no --param {name} was given")
        return factor * values[name]
    return template
