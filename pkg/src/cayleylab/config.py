"""Theorem constants and tolerances, echoed into every report."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path


@dataclass(frozen=True)
class Constants:
    # padding radius t = tau / (A (1 + ln c))
    A_padding: float = 16.0
    # cover count <= c^(K log2(1/eps)); intersection multiplicity <= c^K'
    K_cover: float = 4.0
    K_mult: float = 4.0
    # mu(B(x, eps D)) <= K (1 + eps mu(X))
    K_meassym: float = 8.0
    # P_hat <= K c^3
    K_ksc: float = 16.0
    # lam_k c^K P_hat (delta D)^2 reported next to 1
    K_lemma: float = 1.0
    # m_k reported next to exp(K ln c (ln c + ln k))
    K_multiplicity: float = 1.0
    # dim W vs exp(K (ln c)^2); |rho(G)| vs diam / c^K
    K_dim: float = 1.0
    K_image: float = 1.0
    normalized_bound_target: float = 200.0
    normalized_bound_tripwire: float = 1e4
    tol_stokes: float = 1e-8
    tol_reverse: float = 1e-10
    tol_orthonormal: float = 1e-8
    tol_residual: float = 1e-8
    cluster_rel_gap: float = 1e-6
    kernel_eps: float = 1e-6
    transitivity_tol: float = 1e-8
    max_enum: int = 64
    cheeger_max_exact: int = 24

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Constants":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown constants: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path | None) -> "Constants":
        if path is None:
            return cls()
        return cls.from_dict(json.loads(Path(path).read_text()))
