"""Run-configuration loading, validation and scenario construction.

Configs are JSON with a strict schema (unknown keys rejected, close-match
suggestions offered). A config names one scenario from the registry plus
optional parameter, integrator and run-length overrides.
"""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import jsonschema
import numpy as np

from .eos import GAS_CONSTANT, IdealGasEOS
from .errors import ConfigError, ModelValidationError
from .integrators import IntegratorConfig
from .models import (Scenario, make_adiabatic_piston, make_membrane,
                     make_open_piston, make_piston, make_reaction_cell,
                     make_two_compartment, validate_scenario)
from .nsf1d import FluidEOS, FluidScenario, FluidSpecies, make_nsf_scenario
from .phenomenology import constant_phenomenology
from .reactions import ReactionNetwork
from .state import HeatSourceSpec, PortSpec


def _load_schema(name: str) -> dict:
    with resources.files("vartherm.schemas").joinpath(name).open("r") as fh:
        return json.load(fh)


CONFIG_SCHEMA = _load_schema("config.schema.json")
REPORT_SCHEMA = _load_schema("report.schema.json")

SCENARIO_DESCRIPTIONS = {
    "piston": "gas cylinder closed by a piston with friction (simple system)",
    "adiabatic_piston": "isolated two-cylinder device with conducting connector",
    "membrane": "diffusion of one species through a membrane, single entropy",
    "two_compartment": "coupled heat and matter exchange between two compartments",
    "open_piston": "piston cylinder with matter ports and heat sources",
    "reaction_cell": "closed isochoric reactor with a reaction network",
    "nsf1d": "1D periodic multicomponent Navier-Stokes-Fourier fluid",
}


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    params: dict = field(default_factory=dict)
    integrator: Optional[IntegratorConfig] = None
    t_end: Optional[float] = None
    sample_every: Optional[float] = None
    allow_noncompliant: bool = False


def _suggest(key: str, candidates) -> Optional[str]:
    close = difflib.get_close_matches(key, list(candidates), n=1)
    return close[0] if close else None


def _schema_keys(schema: dict, path: list) -> list:
    """Property names of the sub-schema at a validation error path."""
    node = schema
    for part in path:
        if isinstance(part, int):
            node = node.get("items", {})
        else:
            node = node.get("properties", {}).get(part, {})
        while "$ref" in node:
            ref = node["$ref"].split("/")[-1]
            node = schema.get("$defs", {}).get(ref, {})
    return list(node.get("properties", {}).keys())


def validate_config_dict(doc: dict) -> None:
    """Schema-validate a parsed config; raises ConfigError with a field path
    and, for unknown keys, a closest-match suggestion."""
    validator = jsonschema.Draft7Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if not errors:
        return
    err = errors[0]
    err_path = list(err.absolute_path)
    path = ".".join(str(p) for p in err_path) or "(root)"
    suggestion = None
    if err.validator == "additionalProperties":
        # pull the offending key out of the message and offer a close match
        import re
        m = re.search(r"'([^']+)' (?:was|were) unexpected", err.message)
        if m:
            bad = m.group(1)
            allowed = _schema_keys(CONFIG_SCHEMA, err_path)
            if not allowed and err_path and err_path[0] == "params":
                # per-scenario params schemas live behind the allOf dispatch
                sub = CONFIG_SCHEMA.get("$defs", {}).get(
                    f"params_{doc.get('scenario', '')}", {})
                allowed = list(sub.get("properties", {}).keys())
            suggestion = _suggest(bad, allowed)
            path = f"{path}.{bad}" if path != "(root)" else bad
    msg = f"config invalid at {path}: {err.message}"
    if suggestion:
        msg += f" (did you mean {suggestion!r}?)"
    raise ConfigError(msg, field_path=path, suggestion=suggestion)


def parse_config(doc: dict) -> RunConfig:
    validate_config_dict(doc)
    integ = None
    if "integrator" in doc:
        integ = IntegratorConfig(**doc["integrator"])
    return RunConfig(
        scenario=doc["scenario"],
        params=doc.get("params", {}),
        integrator=integ,
        t_end=doc.get("t_end"),
        sample_every=doc.get("sample_every"),
        allow_noncompliant=doc.get("allow_noncompliant", False),
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(doc)


def _eos_from(params: Optional[dict]) -> IdealGasEOS:
    params = dict(params or {})
    c_v = params.pop("c_v_R", 1.5) * GAS_CONSTANT
    return IdealGasEOS(c_v=c_v, **params)


def build_scenario(cfg: RunConfig):
    """Construct and validate the scenario named by a RunConfig.

    Scenarios built with allow_noncompliant = True skip the admissibility
    probes of the phenomenology; runs then rely on the trajectory-level law
    checks to flag violations.
    """
    p = dict(cfg.params)
    name = cfg.scenario
    try:
        if name == "nsf1d":
            scenario = _build_fluid(cfg, p)
        else:
            scenario = _build_ode(cfg, name, p)
    except (TypeError, ValueError, ModelValidationError) as exc:
        if isinstance(exc, ModelValidationError):
            raise ConfigError(f"invalid scenario parameters: {exc}",
                              field_path=exc.field_path) from exc
        raise ConfigError(f"invalid scenario parameters: {exc}") from exc

    if isinstance(scenario, Scenario):
        if not cfg.allow_noncompliant:
            try:
                validate_scenario(scenario)
            except ModelValidationError as exc:
                where = f" at {exc.field_path}" if exc.field_path else ""
                raise ConfigError(f"validation error{where}: {exc}",
                                  field_path=exc.field_path) from exc
    return scenario


def _build_ode(cfg: RunConfig, name: str, p: dict) -> Scenario:
    eos = _eos_from(p.pop("eos", None))
    compliant = not cfg.allow_noncompliant
    common = {}
    if cfg.t_end is not None:
        common["t_end"] = cfg.t_end
    if cfg.sample_every is not None:
        common["sample_every"] = cfg.sample_every
    if cfg.integrator is not None:
        common["integrator"] = cfg.integrator

    if name == "piston":
        sc = make_piston(m=p.pop("m", 2.0), alpha=p.pop("area", 0.01),
                         N0=p.pop("N0", 1.0), eos=eos,
                         lam=p.pop("friction", 4.0),
                         load_pressure=p.pop("load_pressure", 1.0e5),
                         q0=p.pop("q0", 2.0), v0=p.pop("v0", 0.0),
                         T0=p.pop("T0", 300.0), **common)
    elif name == "adiabatic_piston":
        sc = make_adiabatic_piston(
            m1=p.pop("m1", 1.0), m2=p.pop("m2", 1.0), m3=p.pop("m3", 2.0),
            alpha1=p.pop("area1", 0.01), alpha2=p.pop("area2", 0.01),
            D=p.pop("D", 3.0), ell=p.pop("ell", 1.0),
            N1=p.pop("N1", 1.0), N2=p.pop("N2", 1.0), eos=eos,
            lam1=p.pop("friction1", 25.0), lam2=p.pop("friction2", 25.0),
            kappa=p.pop("kappa", 5.0), q0=p.pop("q0", 0.8),
            v0=p.pop("v0", 0.0), T1_0=p.pop("T1_0", 250.0),
            T2_0=p.pop("T2_0", 350.0), **common)
    elif name == "membrane":
        sc = make_membrane(eoses=(eos, eos, eos),
                           G_1m=p.pop("G_1m", 3.0e-4), G_m2=p.pop("G_m2", 3.0e-4),
                           N_init=p.pop("N_init", (1.5, 0.1, 0.5)),
                           volumes=p.pop("volumes", (1.0e-3, 1.0e-4, 1.0e-3)),
                           T0=p.pop("T0", 300.0), **common)
    elif name == "two_compartment":
        sc = make_two_compartment(
            eoses=(eos, eos),
            onsager_block=np.asarray(p.pop("onsager", [[2.0e-4, 0.0], [0.0, 6.0e-2]]),
                                     dtype=float),
            N_init=p.pop("N_init", (1.2, 0.8)),
            volumes=p.pop("volumes", (1.0e-3, 1.0e-3)),
            T_init=p.pop("T_init", (250.0, 350.0)), **common)
    elif name == "open_piston":
        ports = p.pop("ports", None)
        sources = p.pop("sources", None)
        port_objs = None if ports is None else tuple(
            PortSpec(eos=eos, T=d["T"], p=d["p"], J=d["J"],
                     compartment=d.get("compartment", 0)) for d in ports)
        source_objs = None if sources is None else tuple(
            HeatSourceSpec(T=d["T"], J_S=d["J_S"]) for d in sources)
        sc = make_open_piston(m=p.pop("m", 2.0), alpha=p.pop("area", 0.01),
                              eos=eos, ports=port_objs, sources=source_objs,
                              lam=p.pop("friction", 4.0),
                              load_pressure=p.pop("load_pressure", 1.0e5),
                              q0=p.pop("q0", 2.0), v0=p.pop("v0", 0.0),
                              T0=p.pop("T0", 300.0), N0=p.pop("N0", 1.0), **common)
    elif name == "reaction_cell":
        net = None
        if "nu_fwd" in p or "nu_bwd" in p or "molecular_mass" in p:
            net = ReactionNetwork(nu_fwd=p.pop("nu_fwd"), nu_bwd=p.pop("nu_bwd"),
                                  molecular_mass=p.pop("molecular_mass"))
        kw = {}
        if "flux_coeffs" in p:
            kw["flux_coeffs"] = np.asarray(p.pop("flux_coeffs"), dtype=float)
        n_species = net.n_species if net is not None else 2
        sc = make_reaction_cell(net=net, eoses=(eos,) * n_species,
                                volume=p.pop("volume", 1.0e-3),
                                N_init=p.pop("N_init", (1.2, 0.3)),
                                T0=p.pop("T0", 300.0), **kw, **common)
    else:
        raise ConfigError(f"unknown scenario {name!r}", field_path="scenario")

    if not compliant:
        # rebuild the phenomenology with validation disabled but keep values
        sc = _mark_noncompliant(sc)
    if p:
        raise ConfigError(f"unused scenario parameters: {sorted(p)}",
                          field_path="params")
    return sc


def _mark_noncompliant(sc: Scenario) -> Scenario:
    from dataclasses import replace as _replace
    phen = _replace(sc.phenomenology, compliant=False)
    return _replace(sc, phenomenology=phen)


def _build_fluid(cfg: RunConfig, p: dict) -> FluidScenario:
    eos = None
    if "species" in p:
        specs = []
        for sp in p.pop("species"):
            sp = dict(sp)
            mm = sp.pop("molar_mass", 0.04)
            specs.append(FluidSpecies(eos=_eos_from(sp), molar_mass=mm))
        eos = FluidEOS(species=tuple(specs))
    kw = {}
    for key in ("kind", "n_cells", "length", "T0", "molar_density", "amplitude",
                "mu_shear", "zeta", "L_thermal"):
        if key in p:
            kw[key] = p.pop(key)
    if p:
        raise ConfigError(f"unused scenario parameters: {sorted(p)}",
                          field_path="params")
    return make_nsf_scenario(eos=eos, t_end=cfg.t_end,
                             sample_every=cfg.sample_every,
                             integrator=cfg.integrator, **kw)
