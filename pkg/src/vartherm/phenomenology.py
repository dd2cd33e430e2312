"""Phenomenological transport laws and their admissibility checks.

All coefficients may depend on the full state; the second law constrains
their structure:

    friction matrices lambda^A     symmetric part positive semi-definite
    heat conduction   kappa_AB     symmetric, nonnegative entries
    diffusion         G^{k l}      nonnegative entries
    coupled blocks    L_AB (2x2)   symmetric positive semi-definite
    reaction law      J_a(A)       J . A >= 0

Validation probes these properties on randomized admissible states; models
that fail are rejected unless explicitly marked non-compliant (used by
tests and by the second-law-violation fixtures).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ._numerics import is_psd, symmetric_part
from .errors import ModelValidationError
from .state import SystemTopology, ThermoState


@dataclass(frozen=True)
class PhenomenologyModel:
    """Bundle of transport-coefficient laws for one scenario.

    friction(state, A) -> (n, n) matrix lambda^A
    kappa(state)       -> (P, P) heat conduction coefficients
    G(state)           -> (K, K) diffusion coefficients
    onsager(state, A, B) -> (2, 2) coupled heat/matter block for the pair (A, B)
    reaction_flux(state, affinities) -> (r,) reaction rates
    compliant: set False to bypass validation (deliberately broken fixtures)
    """

    friction: Optional[Callable[[ThermoState, int], np.ndarray]] = None
    kappa: Optional[Callable[[ThermoState], np.ndarray]] = None
    G: Optional[Callable[[ThermoState], np.ndarray]] = None
    onsager: Optional[Callable[[ThermoState, int, int], np.ndarray]] = None
    reaction_flux: Optional[Callable[[ThermoState, np.ndarray], np.ndarray]] = None
    compliant: bool = True


def constant_phenomenology(
    topology: SystemTopology,
    *,
    friction: Optional[Sequence] = None,
    kappa=None,
    G=None,
    onsager=None,
    reaction_coeffs=None,
    reaction_law: Optional[Callable] = None,
    compliant: bool = True,
) -> PhenomenologyModel:
    """Build a PhenomenologyModel from constant coefficients.

    friction: one scalar or (n, n) matrix per subsystem
    kappa:    (P, P) or scalar (uniform off-diagonal coefficient)
    G:        (K, K)
    onsager:  dict {(A, B): 2x2} or a single 2x2 used for every pair
    reaction_coeffs: (r, r) PSD matrix for the linear law J = coeffs . A
    reaction_law: overrides the linear law (e.g. mass action)
    """
    n, P, K = topology.n_mech, topology.P, topology.K

    fr = None
    if friction is not None:
        mats = []
        for lam in friction:
            lam = np.asarray(lam, dtype=float)
            mats.append(lam * np.eye(n) if lam.ndim == 0 else lam.reshape(n, n))
        if len(mats) != P:
            raise ModelValidationError("need one friction matrix per subsystem",
                                       field_path="phenomenology.friction")
        fr = lambda state, A, _m=tuple(mats): _m[A]

    kp = None
    if kappa is not None:
        km = np.asarray(kappa, dtype=float)
        if km.ndim == 0:
            km = float(km) * (np.ones((P, P)) - np.eye(P))
        km = km.reshape(P, P)
        kp = lambda state, _k=km: _k

    Gf = None
    if G is not None:
        Gm = np.asarray(G, dtype=float).reshape(K, K)
        Gf = lambda state, _g=Gm: _g

    on = None
    if onsager is not None:
        if isinstance(onsager, dict):
            blocks = {tuple(sorted(k)): np.asarray(v, dtype=float).reshape(2, 2)
                      for k, v in onsager.items()}
            on = lambda state, A, B, _b=blocks: _b[tuple(sorted((A, B)))]
        else:
            block = np.asarray(onsager, dtype=float).reshape(2, 2)
            on = lambda state, A, B, _b=block: _b

    rx = reaction_law
    if rx is None and reaction_coeffs is not None:
        ell = np.atleast_2d(np.asarray(reaction_coeffs, dtype=float))
        rx = lambda state, aff, _l=ell: _l @ aff

    return PhenomenologyModel(friction=fr, kappa=kp, G=Gf, onsager=on,
                              reaction_flux=rx, compliant=compliant)


def mass_action_law(net, k_fwd, k_bwd):
    """Opt-in mass-action closure J_a = k_f prod N^nu' - k_b prod N^nu''.

    Mole numbers stand in for activities. Thermodynamic consistency (J.A >= 0)
    is the user's responsibility: it holds only when the rate constants are
    matched to the chemical potentials.
    """
    k_fwd = np.atleast_1d(np.asarray(k_fwd, dtype=float))
    k_bwd = np.atleast_1d(np.asarray(k_bwd, dtype=float))

    def law(state, affinities):
        N = np.maximum(state.N, 0.0)
        fwd = k_fwd * np.prod(N[None, :] ** net.nu_fwd, axis=1)
        bwd = k_bwd * np.prod(N[None, :] ** net.nu_bwd, axis=1)
        return fwd - bwd

    return law


# validation ---------------------------------------------------------------

PSD_TOL = 1e-12


def _perturbed_states(x0: ThermoState, rng: np.random.Generator, count: int):
    """Randomized admissible states near a reference state."""
    for _ in range(count):
        yield x0.replace(
            q=x0.q * (1.0 + 0.1 * rng.uniform(-1, 1, x0.q.size)),
            v=x0.v + rng.uniform(-1, 1, x0.v.size),
            S=x0.S * (1.0 + 0.1 * rng.uniform(-1, 1, x0.S.size)),
            N=x0.N * (1.0 + 0.3 * rng.uniform(-1, 1, x0.N.size)),
        )


def validate_phenomenology(phen: PhenomenologyModel, topology: SystemTopology,
                           x0: ThermoState, n_probes: int = 20, seed: int = 0) -> None:
    """Probe coefficient laws on randomized states; raise ModelValidationError on failure."""
    if not phen.compliant:
        return
    rng = np.random.default_rng(seed)
    for x in _perturbed_states(x0, rng, n_probes):
        if phen.friction is not None:
            for A in range(topology.P):
                lam = np.asarray(phen.friction(x, A), dtype=float)
                if not is_psd(lam, PSD_TOL):
                    raise ModelValidationError(
                        f"friction matrix of subsystem {A} has negative symmetric part",
                        field_path="phenomenology.friction")
        if phen.kappa is not None:
            km = np.asarray(phen.kappa(x), dtype=float)
            if not np.allclose(km, km.T, rtol=0, atol=PSD_TOL * max(1.0, np.max(np.abs(km)))):
                raise ModelValidationError("kappa must be symmetric",
                                           field_path="phenomenology.kappa")
            off = km[~np.eye(topology.P, dtype=bool)] if topology.P else km.ravel()
            if off.size and np.min(off) < -PSD_TOL * max(1.0, np.max(np.abs(km))):
                raise ModelValidationError("kappa entries must be nonnegative",
                                           field_path="phenomenology.kappa")
        if phen.G is not None:
            Gm = np.asarray(phen.G(x), dtype=float)
            if Gm.size and np.min(Gm) < -PSD_TOL * max(1.0, np.max(np.abs(Gm))):
                raise ModelValidationError("G entries must be nonnegative",
                                           field_path="phenomenology.G")
        if phen.onsager is not None:
            for A in range(topology.P):
                for B in range(A + 1, topology.P):
                    blk = np.asarray(phen.onsager(x, A, B), dtype=float)
                    sym_gap = np.max(np.abs(blk - blk.T))
                    if sym_gap > PSD_TOL * max(1.0, np.max(np.abs(blk))):
                        raise ModelValidationError(
                            f"coupled block ({A},{B}) must be symmetric",
                            field_path="phenomenology.onsager")
                    if not is_psd(blk, PSD_TOL):
                        raise ModelValidationError(
                            f"coupled block ({A},{B}) must be positive semi-definite",
                            field_path="phenomenology.onsager")


def onsager_force_response(block: np.ndarray, dT: float, dmu_over_T: float):
    """Apply a 2x2 coupled block to the pair of forces (T^B - T^A, mu^B/T^B - mu^A/T^A).

    Returns (Y_H, J_matter): Y_H is the entry J_AB (T^A - T^B)/(T^A T^B) and
    J_matter the molar flow rate from B to A.
    """
    out = np.asarray(block, dtype=float) @ np.array([dT, dmu_over_T])
    return float(out[0]), float(out[1])


def symmetrize_input(M):
    return symmetric_part(M)
