"""JSON state/channel files and the shipped fixture set.

State file:   {"dA", "dB", "matrix_real", "matrix_imag"}
Channel file: {"d_in", "d_out", "kraus": [{"real", "imag"}, ...]}
Matrices are nested row-major lists with exactly the declared dimensions.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InvalidInput, ParseError, ValidationError
from .objects import (
    BipartiteState,
    QuantumChannel,
    dephasing_channel,
    identity_channel,
    isotropic_state,
    pure_state,
    unitary_channel,
)
from .sampling import random_unitary

FIXTURE_DIR = Path(__file__).parent / "fixtures"


# --- encoding ---------------------------------------------------------------


def _split(m: np.ndarray) -> tuple[list, list]:
    m = np.asarray(m, dtype=np.complex128)
    return m.real.tolist(), m.imag.tolist()


def state_to_dict(state: BipartiteState) -> dict:
    re, im = _split(state.rho)
    return {"dA": state.dA, "dB": state.dB, "matrix_real": re, "matrix_imag": im}


def channel_to_dict(channel: QuantumChannel) -> dict:
    kraus = []
    for k in channel.kraus:
        re, im = _split(k)
        kraus.append({"real": re, "imag": im})
    return {"d_in": channel.d_in, "d_out": channel.d_out, "kraus": kraus}


def dumps(obj) -> str:
    """Canonical JSON text: fixed key order, full float precision, trailing newline."""
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


# --- decoding ---------------------------------------------------------------


def _loads(text: str, source: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _get(obj, key, source):
    if not isinstance(obj, dict):
        raise ParseError(f"{source}: expected a JSON object", field=key)
    if key not in obj:
        raise ParseError(f"{source}: missing field", field=key)
    return obj[key]


def _int(obj, key, source) -> int:
    v = _get(obj, key, source)
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ParseError(f"{source}: expected a positive integer, got {v!r}", field=key)
    return v


def _matrix(v, rows: int, cols: int, field: str, source: str) -> np.ndarray:
    if not isinstance(v, list) or len(v) != rows:
        raise ParseError(f"{source}: expected {rows} rows", field=field)
    for i, row in enumerate(v):
        if not isinstance(row, list) or len(row) != cols:
            raise ParseError(f"{source}: row {i} must have {cols} entries", field=field)
        for x in row:
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ParseError(f"{source}: row {i} has a non-numeric entry {x!r}", field=field)
    m = np.array(v, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ParseError(f"{source}: non-finite entry", field=field)
    return m


def state_from_dict(obj, source: str = "<state>") -> BipartiteState:
    dA, dB = _int(obj, "dA", source), _int(obj, "dB", source)
    n = dA * dB
    re = _matrix(_get(obj, "matrix_real", source), n, n, "matrix_real", source)
    im = _matrix(_get(obj, "matrix_imag", source), n, n, "matrix_imag", source)
    try:
        return BipartiteState(dA, dB, re + 1j * im)
    except InvalidInput as exc:
        raise ValidationError(f"{source}: invalid state: {exc}") from None


def channel_from_dict(obj, source: str = "<channel>") -> QuantumChannel:
    d_in, d_out = _int(obj, "d_in", source), _int(obj, "d_out", source)
    kraus = _get(obj, "kraus", source)
    if not isinstance(kraus, list) or not kraus:
        raise ParseError(f"{source}: expected a non-empty list", field="kraus")
    ops = []
    for i, k in enumerate(kraus):
        re = _matrix(_get(k, "real", source), d_out, d_in, f"kraus[{i}].real", source)
        im = _matrix(_get(k, "imag", source), d_out, d_in, f"kraus[{i}].imag", source)
        ops.append(re + 1j * im)
    try:
        return QuantumChannel.from_kraus(ops, d_in, d_out)
    except InvalidInput as exc:
        raise ValidationError(f"{source}: invalid channel: {exc}") from None


def resolve(path_or_name: str) -> Path:
    """A file path, or the name of a shipped fixture (with or without .json)."""
    p = Path(path_or_name)
    if p.exists():
        return p
    name = p.name if p.suffix == ".json" else p.name + ".json"
    q = FIXTURE_DIR / name
    if str(p.parent) in ("", ".") and q.exists():
        return q
    raise ParseError(f"no such file or fixture: {path_or_name}")


def read_state(path_or_name) -> BipartiteState:
    p = resolve(str(path_or_name))
    return state_from_dict(_loads(p.read_text(), str(p)), str(p))


def read_channel(path_or_name) -> QuantumChannel:
    p = resolve(str(path_or_name))
    return channel_from_dict(_loads(p.read_text(), str(p)), str(p))


def write_state(state: BipartiteState, path) -> None:
    Path(path).write_text(dumps(state_to_dict(state)))


def write_channel(channel: QuantumChannel, path) -> None:
    Path(path).write_text(dumps(channel_to_dict(channel)))


# --- fixtures ---------------------------------------------------------------


def fixture_states() -> dict[str, BipartiteState]:
    plus = np.array([1, 1]) / np.sqrt(2)
    product = np.kron(np.diag([0.7, 0.3]), 0.8 * np.outer(plus, plus) + 0.2 * np.eye(2) / 2)
    r0 = np.array([[0.9, 0.1], [0.1, 0.1]])
    r1 = np.array([[0.3, -0.2j], [0.2j, 0.7]])
    classical = np.kron(np.diag([0.6, 0.0]), r0) + np.kron(np.diag([0.0, 0.4]), r1)
    return {
        "bell_d2": pure_state(np.array([1, 0, 0, 1]) / np.sqrt(2), 2, 2),
        "product_d2": BipartiteState(2, 2, product),
        "pure_82": pure_state(np.array([np.sqrt(0.8), 0, 0, np.sqrt(0.2)]), 2, 2),
        "iso_d2_p0": isotropic_state(2, 0.0),
        "iso_d2_p33": isotropic_state(2, 1 / 3),
        "iso_d2_p50": isotropic_state(2, 0.5),
        "iso_d2_p100": isotropic_state(2, 1.0),
        "iso_d3_p50": isotropic_state(3, 0.5),
        "classical_on_A_d2": BipartiteState(2, 2, classical),
    }


def fixture_channels() -> dict[str, QuantumChannel]:
    from .cdp import pure_witness_channels

    l0, l1 = pure_witness_channels(2)
    return {
        "eq9_pair_d2_0": l0,
        "eq9_pair_d2_1": l1,
        "dephase_d2": dephasing_channel(2),
        "identity_d2": identity_channel(2),
        "random_unitary_d2": unitary_channel(random_unitary(2, seed=2016)),
    }


def write_fixtures(directory=FIXTURE_DIR) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, st in fixture_states().items():
        write_state(st, directory / f"{name}.json")
        written.append(directory / f"{name}.json")
    for name, ch in fixture_channels().items():
        write_channel(ch, directory / f"{name}.json")
        written.append(directory / f"{name}.json")
    return written


if __name__ == "__main__":
    for p in write_fixtures():
        print(p)
