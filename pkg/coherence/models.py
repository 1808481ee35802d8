"""Built-in target models and the JSON model-file format"""
import json
from pathlib import Path
from typing import Callable, Dict, Union

import numpy as np

from coherence.implementation import TargetSpec
from coherence.states import HermitianObservable, UnitaryGate
from utils.error_handler import ModelFileError, ValidationError
from utils.logger import get_logger

logger = get_logger(__name__)


def bitflip_target() -> TargetSpec:
    """Qubit with A_S = (|1⟩⟨1| − |0⟩⟨0|)/2 and the bit flip U_S = X."""
    a_s = np.diag([-0.5, 0.5]).astype(np.complex128)
    u_s = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    return TargetSpec(HermitianObservable(a_s), UnitaryGate(u_s), name="bitflip")


def erasure_target() -> TargetSpec:
    """
    Two qubits with magnetization A_S = (|1⟩⟨1| − |0⟩⟨0|)^⊗2.

    U_S swaps |10⟩ and |11⟩ and leaves |00⟩, |01⟩ alone; it maps
    α|00⟩ + β|11⟩ to the product α|00⟩ + β|10⟩.
    """
    z = np.diag([-1.0, 1.0])
    a_s = np.kron(z, z).astype(np.complex128)
    u_s = np.eye(4, dtype=np.complex128)[:, [0, 1, 3, 2]]
    return TargetSpec(HermitianObservable(a_s), UnitaryGate(u_s), name="erasure")


BUILTIN_MODELS: Dict[str, Callable[[], TargetSpec]] = {
    "bitflip": bitflip_target,
    "erasure": erasure_target,
}


def builtin_model(name: str) -> TargetSpec:
    try:
        return BUILTIN_MODELS[name]()
    except KeyError:
        raise ValidationError(f"Unknown builtin model '{name}'. "
                              f"Known models: {', '.join(sorted(BUILTIN_MODELS))}")


def _parse_matrix(entries, dim: int, key: str) -> np.ndarray:
    if not isinstance(entries, list) or len(entries) != dim * dim:
        raise ModelFileError(f"'{key}' must list {dim * dim} [re, im] pairs in row-major order")
    values = []
    for entry in entries:
        if (not isinstance(entry, (list, tuple)) or len(entry) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)):
            raise ModelFileError(f"'{key}' entries must be [re, im] number pairs, got {entry!r}")
        values.append(complex(entry[0], entry[1]))
    return np.array(values, dtype=np.complex128).reshape(dim, dim)


def parse_model(document: dict) -> TargetSpec:
    """
    Build a TargetSpec from a decoded model document.

    Expected keys: d_S (int), A_S and U_S (row-major lists of [re, im]).

    Raises:
        ModelFileError: missing keys or malformed entries
        ValidationError: A_S not Hermitian or U_S not unitary
    """
    if not isinstance(document, dict):
        raise ModelFileError("model document must be a JSON object")
    missing = [k for k in ("d_S", "A_S", "U_S") if k not in document]
    if missing:
        raise ModelFileError(f"model document is missing keys: {', '.join(missing)}")
    dim = document["d_S"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ModelFileError(f"'d_S' must be a positive integer, got {dim!r}")
    a_s = _parse_matrix(document["A_S"], dim, "A_S")
    u_s = _parse_matrix(document["U_S"], dim, "U_S")
    return TargetSpec(HermitianObservable(a_s), UnitaryGate(u_s),
                      name=str(document.get("name", "custom")))


def load_model(path: Union[str, Path]) -> TargetSpec:
    path = Path(path)
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ModelFileError(f"{path}: invalid JSON ({e})")
    target = parse_model(document)
    logger.info(f"Loaded model '{target.name}' from {path} (d_S={target.d_S})")
    return target


def model_document(target: TargetSpec) -> dict:
    """Inverse of parse_model."""
    def encode(mat):
        return [[float(z.real), float(z.imag)] for z in mat.reshape(-1)]

    return {"name": target.name, "d_S": target.d_S,
            "A_S": encode(target.A_S.mat), "U_S": encode(target.U_S.mat)}
