"""Outer solar system N-body model.

Six gravitating bodies (Sun with the inner planets lumped in, Jupiter,
Saturn, Uranus, Neptune, Pluto) in units of astronomical units, earth
days and solar masses, with G = 2.95912208286e-4.  The initial data ship
as a plain-text file next to this module; the environment variable
GEOMINT_DATA_DIR overrides the directory it is read from.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ContractViolationError
from .state import PhaseState
from .systems import SeparableSystem

GRAVITATIONAL_CONSTANT = 2.95912208286e-4
DATA_FILE = "outer_solar_system.txt"
DATA_DIR_ENV = "GEOMINT_DATA_DIR"


@dataclass
class NBodyData:
    """Parsed N-body dataset: names, masses, stacked positions and momenta."""

    names: list
    masses: np.ndarray
    positions: np.ndarray  # shape (n, 3)
    momenta: np.ndarray  # shape (n, 3)

    def __post_init__(self):
        n = len(self.names)
        if self.masses.shape != (n,) or np.any(self.masses <= 0.0):
            raise ContractViolationError("each body needs a positive mass")
        if self.positions.shape != (n, 3) or self.momenta.shape != (n, 3):
            raise ContractViolationError("positions and momenta must have shape (n, 3)")
        for arr in (self.masses, self.positions, self.momenta):
            if not np.all(np.isfinite(arr)):
                raise ContractViolationError("dataset contains non-finite entries")

    @property
    def n_bodies(self):
        return len(self.names)


def _data_path():
    env = os.environ.get(DATA_DIR_ENV)
    if env:
        return Path(env) / DATA_FILE
    return Path(__file__).parent / "data" / DATA_FILE


def load_nbody_data(path=None) -> NBodyData:
    """Read a dataset file: '#' comment lines, then one body per line
    with fields  name mass x y z px py pz  (whitespace separated)."""
    path = Path(path) if path is not None else _data_path()
    try:
        text = path.read_text()
    except OSError as exc:
        raise ContractViolationError(f"cannot read N-body dataset {path}: {exc}") from exc
    names, masses, pos, mom = [], [], [], []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 8:
            raise ContractViolationError(
                f"{path}:{lineno}: expected 8 fields (name mass x y z px py pz), got {len(fields)}"
            )
        try:
            values = [float(f) for f in fields[1:]]
        except ValueError as exc:
            raise ContractViolationError(f"{path}:{lineno}: {exc}") from exc
        names.append(fields[0])
        masses.append(values[0])
        pos.append(values[1:4])
        mom.append(values[4:7])
    if len(names) < 2:
        raise ContractViolationError(f"{path}: need at least two bodies, found {len(names)}")
    return NBodyData(
        names=names,
        masses=np.array(masses),
        positions=np.array(pos),
        momenta=np.array(mom),
    )


class _NBodyPotential:
    """Pairwise gravitational potential and its gradient, vectorized."""

    def __init__(self, masses, g):
        self.masses = masses
        self.g = g
        self.n = masses.size
        # m_i * m_j for i < j, and the full outer product for forces.
        self._mm = np.outer(masses, masses)

    def eval_V(self, q):
        x = q.reshape(self.n, 3)
        diff = x[:, None, :] - x[None, :, :]
        dist = np.sqrt(np.sum(diff * diff, axis=-1))
        iu = np.triu_indices(self.n, k=1)
        return -self.g * float(np.sum(self._mm[iu] / dist[iu]))

    def grad_V(self, q):
        x = q.reshape(self.n, 3)
        diff = x[:, None, :] - x[None, :, :]
        dist2 = np.sum(diff * diff, axis=-1)
        np.fill_diagonal(dist2, 1.0)
        inv3 = dist2 ** (-1.5)
        np.fill_diagonal(inv3, 0.0)
        w = self.g * self._mm * inv3
        grad = np.sum(w[:, :, None] * diff, axis=1)
        return grad.reshape(-1)


def make_outer_solar_system(path=None):
    """Build the outer solar system as (system, initial_state, data).

    The Hamiltonian is H = sum |p_i|^2 / (2 m_i) - G sum_{i<j} m_i m_j / r_ij
    on stacked 3-vectors, so dim = 3 * n_bodies.
    """
    data = load_nbody_data(path)
    n = data.n_bodies
    inv_mass = np.repeat(1.0 / data.masses, 3)
    pot = _NBodyPotential(data.masses, GRAVITATIONAL_CONSTANT)
    sys = SeparableSystem(
        mass_inverse=np.diag(inv_mass),
        eval_V=pot.eval_V,
        grad_V=pot.grad_V,
        name="outer-solar-system",
    )
    state = PhaseState(p=data.momenta.reshape(-1), q=data.positions.reshape(-1))
    return sys, state, data


def heliocentric_distances(data: NBodyData, state: PhaseState) -> np.ndarray:
    """Distances of every body except the first from the first body."""
    x = state.q.reshape(data.n_bodies, 3)
    return np.linalg.norm(x[1:] - x[0], axis=1)
