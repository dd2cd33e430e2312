"""Reaction networks: stoichiometry, affinities and mass conservation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError


def _matrix(x) -> np.ndarray:
    a = np.array(x, dtype=float, copy=True)
    a = np.atleast_2d(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ReactionNetwork:
    """r reactions among R species.

    nu_fwd, nu_bwd: (r, R) reactant and product stoichiometric coefficients;
    the signed matrix nu = nu_bwd - nu_fwd drives mole-number changes.
    molecular_mass: (R,) molar masses [kg/mol].
    """

    nu_fwd: np.ndarray
    nu_bwd: np.ndarray
    molecular_mass: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "nu_fwd", _matrix(self.nu_fwd))
        object.__setattr__(self, "nu_bwd", _matrix(self.nu_bwd))
        m = np.array(self.molecular_mass, dtype=float, copy=True).reshape(-1)
        m.flags.writeable = False
        object.__setattr__(self, "molecular_mass", m)
        if self.nu_fwd.shape != self.nu_bwd.shape:
            raise DimensionMismatchError("nu_fwd and nu_bwd must have the same shape")
        if self.nu_fwd.shape[1] != m.size:
            raise DimensionMismatchError("molecular_mass must list one mass per species")

    @property
    def n_reactions(self) -> int:
        return self.nu_fwd.shape[0]

    @property
    def n_species(self) -> int:
        return self.nu_fwd.shape[1]

    @property
    def nu(self) -> np.ndarray:
        """Signed stoichiometry, products minus reactants."""
        return self.nu_bwd - self.nu_fwd


def affinity(net: ReactionNetwork, mu) -> np.ndarray:
    """Affinities A^a = -sum_I nu^a_I mu^I [J/mol] for chemical potentials mu."""
    mu = np.asarray(mu, dtype=float)
    if mu.size != net.n_species:
        raise DimensionMismatchError(
            f"expected {net.n_species} chemical potentials, got {mu.size}")
    return -(net.nu @ mu)


def lavoisier_check(net: ReactionNetwork, rel_tol: float = 1e-12) -> bool:
    """Mass conservation per reaction: sum_I m_I nu^a_I = 0 for every a."""
    for a in range(net.n_reactions):
        terms = net.molecular_mass * net.nu[a]
        scale = np.max(np.abs(terms)) if terms.size else 0.0
        if abs(np.sum(terms)) > rel_tol * scale:
            return False
    return True
