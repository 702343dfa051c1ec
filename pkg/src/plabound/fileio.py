"""Plain-text scenario and solution files.

Both formats are ``key = value`` lines; ``#`` starts a comment. Complex
scalars are written ``re,im``; matrices are their entries in row-major order,
separated by spaces, each entry a ``re,im`` pair. Floats use ``repr`` so a
dump/load cycle is exact.

Scenario file, recipe form::

    format = plabound-scenario/1
    kind = identity_block          # or: wishart
    n = 4
    rho = 0.5,0.0
    sigma = 0.9,0.0
    tau = 0.45,0.0
    # wishart only: seed = 7, field = real

Scenario file, explicit form: ``kind = explicit``, ``n``, ``m`` and the six
blocks ``Kxx Kxy Kxz Kyy Kyz Kzz``.

Solution file: ``format = plabound-solution/1``, the explicit scenario
blocks, the matrices ``Z`` and ``C``, and the scalar diagnostics of
:class:`~plabound.solver.AttackSolution` (``history`` is a space separated
list of floats).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .covmodel import BLOCK_NAMES, JointChannelCovariance, ScenarioSpec
from .errors import StructuralError
from .solver import AttackParameters, AttackSolution

SCENARIO_FORMAT = "plabound-scenario/1"
SOLUTION_FORMAT = "plabound-solution/1"

_SOLUTION_FLOATS = ("j_star", "d_star", "j_cf", "stationarity_residual", "fixed_point_residual")
_SOLUTION_INTS = ("iterations",)
_SOLUTION_BOOLS = ("converged", "fixed_point_converged", "projected", "projection_fallback",
                   "relaxed_feasible", "regularized", "non_monotone", "refined")


def format_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real!r},{z.imag!r}"


def parse_complex(s: str) -> complex:
    parts = s.strip().split(",")
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise StructuralError(f"cannot parse complex entry {s!r}")


def format_matrix(a: np.ndarray) -> str:
    return " ".join(format_complex(v) for v in np.asarray(a).ravel())


def parse_matrix(s: str, shape: tuple[int, int]) -> np.ndarray:
    entries = s.split()
    if len(entries) != shape[0] * shape[1]:
        raise StructuralError(f"expected {shape[0] * shape[1]} entries, got {len(entries)}")
    return np.array([parse_complex(e) for e in entries], dtype=complex).reshape(shape)


def parse_keyvalue(text: str) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise StructuralError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _blocks_lines(K: JointChannelCovariance) -> list[str]:
    lines = [f"n = {K.n}", f"m = {K.m}"]
    lines += [f"{name} = {format_matrix(getattr(K, name))}" for name in BLOCK_NAMES]
    return lines


def _blocks_from(kv: dict[str, str]) -> JointChannelCovariance:
    try:
        n, m = int(kv["n"]), int(kv["m"])
    except KeyError as exc:
        raise StructuralError(f"missing key {exc.args[0]!r}") from None
    shapes = {"Kxx": (n, n), "Kxy": (n, n), "Kxz": (n, m), "Kyy": (n, n), "Kyz": (n, m), "Kzz": (m, m)}
    blocks = {}
    for name, shape in shapes.items():
        if name not in kv:
            raise StructuralError(f"missing block {name}")
        blocks[name] = parse_matrix(kv[name], shape)
    return JointChannelCovariance(**blocks, meta={"kind": "explicit"})


def dumps_scenario(obj: ScenarioSpec | JointChannelCovariance) -> str:
    lines = [f"format = {SCENARIO_FORMAT}"]
    if isinstance(obj, JointChannelCovariance):
        lines.append("kind = explicit")
        lines += _blocks_lines(obj)
    else:
        lines += [f"kind = {obj.kind}", f"n = {obj.n}"]
        if obj.kind == "identity_block":
            lines.append(f"rho = {format_complex(obj.rho)}")
            if obj.sigma is not None:
                lines.append(f"sigma = {format_complex(obj.sigma)}")
            if obj.tau is not None:
                lines.append(f"tau = {format_complex(obj.tau)}")
        else:
            lines += [f"seed = {obj.seed}", f"field = {obj.field}"]
    return "\n".join(lines) + "\n"


def loads_scenario(text: str) -> ScenarioSpec | JointChannelCovariance:
    kv = parse_keyvalue(text)
    fmt = kv.get("format")
    if fmt != SCENARIO_FORMAT:
        raise StructuralError(f"unsupported scenario format {fmt!r}")
    kind = kv.get("kind")
    if kind == "explicit":
        return _blocks_from(kv)
    if kind == "identity_block":
        return ScenarioSpec(
            kind=kind, n=int(kv["n"]),
            rho=parse_complex(kv.get("rho", "0")),
            sigma=parse_complex(kv["sigma"]) if "sigma" in kv else None,
            tau=parse_complex(kv["tau"]) if "tau" in kv else None,
        )
    if kind == "wishart":
        return ScenarioSpec(kind=kind, n=int(kv["n"]), seed=int(kv.get("seed", 0)),
                            field=kv.get("field", "real"))
    raise StructuralError(f"unknown scenario kind {kind!r}")


def load_scenario(path) -> JointChannelCovariance:
    obj = loads_scenario(Path(path).read_text())
    return obj if isinstance(obj, JointChannelCovariance) else obj.build()


def dumps_solution(K: JointChannelCovariance, sol: AttackSolution) -> str:
    lines = [f"format = {SOLUTION_FORMAT}"]
    lines += _blocks_lines(K)
    lines.append(f"Z = {format_matrix(sol.params.Z)}")
    lines.append(f"C = {format_matrix(sol.params.C)}")
    for key in _SOLUTION_FLOATS:
        lines.append(f"{key} = {float(getattr(sol, key))!r}")
    for key in _SOLUTION_INTS:
        lines.append(f"{key} = {int(getattr(sol, key))}")
    for key in _SOLUTION_BOOLS:
        lines.append(f"{key} = {int(bool(getattr(sol, key)))}")
    lines.append("history = " + " ".join(repr(float(h)) for h in sol.history))
    return "\n".join(lines) + "\n"


def loads_solution(text: str) -> tuple[JointChannelCovariance, AttackSolution]:
    kv = parse_keyvalue(text)
    if kv.get("format") != SOLUTION_FORMAT:
        raise StructuralError(f"unsupported solution format {kv.get('format')!r}")
    K = _blocks_from(kv)
    params = AttackParameters(parse_matrix(kv["Z"], (K.n, K.m)), parse_matrix(kv["C"], (K.n, K.n)))
    fields = {key: float(kv[key]) for key in _SOLUTION_FLOATS}
    fields.update({key: int(kv[key]) for key in _SOLUTION_INTS})
    fields.update({key: bool(int(kv[key])) for key in _SOLUTION_BOOLS})
    hist = kv.get("history", "")
    fields["history"] = [float(h) for h in hist.split()] if hist else []
    return K, AttackSolution(params=params, n=K.n, **fields)


def save_solution(path, K: JointChannelCovariance, sol: AttackSolution) -> None:
    Path(path).write_text(dumps_solution(K, sol))


def load_solution(path) -> tuple[JointChannelCovariance, AttackSolution]:
    return loads_solution(Path(path).read_text())

