"""Locality distances and the row-by-row source pipeline.

A parameter row is a named cavity configuration read from an INI file (one
section per row, rates as nu/2pi in MHz). For each row the pipeline finds the
bandwidth at which the atom reaches 10% excitation, picks the laser bandwidth,
and reports the visibility, the input photon number and the minimum
propagation distance.
"""

from __future__ import annotations

import configparser
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from importlib import resources

from . import cavity
from .errors import ParameterDomainError, RowError
from .optimizer import (
    DEFAULT_STARTS,
    critical_efficiency,
    critical_transmission,
    optimize_chsh,
    realistic_problem,
)
from .units import SPEED_OF_LIGHT_M_PER_US, angular_to_mhz, round_distance

PULSE_FACTOR = 6.0 * math.sqrt(2.0)
ROW_KEYS = ("g_MHz", "kappa_b_MHz", "kappa_c_MHz", "kappa_L_MHz", "Gamma_MHz", "gOverDelta", "rBS2", "alpha_target")


@dataclass(frozen=True)
class TimingBudget:
    """Measurement and setting-choice times in microseconds.

    Only the atomic sum ``dt_at_m + dt_at_c`` enters the distance. The
    default ``gamma_Lm`` is the bandwidth whose pulse window ``6 sqrt(2) / gamma``
    equals that sum.
    """

    dt_at_m: float = 1.0
    dt_at_c: float = 0.0
    dt_ph_c: float = 0.0
    gamma_Lm: float | None = None

    def __post_init__(self):
        for name in ("dt_at_m", "dt_at_c", "dt_ph_c"):
            if getattr(self, name) < 0:
                raise ParameterDomainError(f"{name} must be >= 0")
        if self.gamma_Lm is None:
            atomic = self.dt_at_m + self.dt_at_c
            object.__setattr__(self, "gamma_Lm", PULSE_FACTOR / atomic if atomic > 0 else math.inf)

    @property
    def atomic_time(self):
        return self.dt_at_m + self.dt_at_c


def pulse_duration(gamma_L):
    """Photonic measurement window for a pulse of bandwidth ``gamma_L`` (rad/us), in us."""
    if not gamma_L > 0:
        raise ParameterDomainError(f"gamma_L must be > 0, got {gamma_L!r}")
    return PULSE_FACTOR / gamma_L


def min_distance(budget: TimingBudget, gamma_L):
    """Minimum source-to-detector separation in metres (unrounded)."""
    photonic = budget.dt_ph_c + pulse_duration(gamma_L)
    return SPEED_OF_LIGHT_M_PER_US * max(photonic, budget.atomic_time)


# ---------------------------------------------------------------- rows


@dataclass(frozen=True)
class CavityRow:
    name: str
    g_MHz: float
    kappa_b_MHz: float
    kappa_c_MHz: float
    kappa_L_MHz: float
    Gamma_MHz: float
    gOverDelta: float = 0.1
    rBS2: float = cavity.DEFAULT_RBS2
    alpha_target: float = 2.1

    def params(self) -> cavity.CavityParams:
        return cavity.CavityParams.from_mhz(
            self.g_MHz, self.kappa_b_MHz, self.kappa_c_MHz, self.kappa_L_MHz,
            self.Gamma_MHz, self.gOverDelta, self.rBS2,
        )

    @property
    def kappa_MHz(self):
        return self.kappa_b_MHz + self.kappa_c_MHz + self.kappa_L_MHz

    @property
    def f_cav(self):
        return (self.kappa_b_MHz + self.kappa_L_MHz) / self.kappa_c_MHz


def parse_rows(text) -> dict:
    parser = configparser.ConfigParser()
    parser.optionxform = str  # keys are case sensitive (g_MHz, gOverDelta)
    parser.read_string(text)
    rows = {}
    for name in parser.sections():
        section = parser[name]
        unknown = set(section) - set(ROW_KEYS)
        if unknown:
            raise ValueError(f"row {name!r}: unknown keys {sorted(unknown)}")
        missing = [k for k in ROW_KEYS[:5] if k not in section]
        if missing:
            raise ValueError(f"row {name!r}: missing keys {missing}")
        rows[name] = CavityRow(name=name, **{k: section.getfloat(k) for k in section})
    return rows


def load_rows(path=None) -> dict:
    """Rows from ``path``, or the packaged defaults when ``path`` is None."""
    if path is None:
        text = resources.files("hybridbell").joinpath("data/rows.ini").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return parse_rows(text)


DEFAULT_ROW_ORDER = ("cs-symmetric", "mpq-asym", "cs-lossless", "rb-mpq", "rb-lossless", "rb-highC")


def default_rows():
    rows = load_rows()
    return [rows[k] for k in DEFAULT_ROW_ORDER]


# ---------------------------------------------------------------- pipeline


@dataclass(frozen=True)
class RowRecord:
    """One table line. Rates in MHz (nu/2pi), distances in metres."""

    name: str
    g_MHz: float
    kappa_MHz: float
    Gamma_MHz: float
    f_cav: float
    kappa_b_MHz: float
    kappa_c_MHz: float
    kappa_L_MHz: float
    cooperativity: float
    gamma01_MHz: float | None
    gamma_eff_MHz: float
    spectral_factor: float
    V_untruncated: float
    V_oracle: float
    truncation_factor: float
    V: float
    alpha_in_sq: float
    max_pe: float
    d_min_m: float
    d_min_rounded_m: float

    def as_dict(self):
        return asdict(self)


def effective_bandwidth(params: cavity.CavityParams, gamma01, budget: TimingBudget):
    """min(kappa, gamma_0.1, gamma_Lm), ignoring gamma_0.1 when none was found."""
    candidates = [params.kappa, budget.gamma_Lm]
    if gamma01 is not None:
        candidates.append(gamma01)
    return min(candidates)


def row_record(row: CavityRow, budget: TimingBudget = TimingBudget(), truncation=True) -> RowRecord:
    try:
        params = row.params()
        search = cavity.gamma_01_search(params, row.alpha_target)
        gamma = effective_bandwidth(params, search.gamma, budget)
        window = max(pulse_duration(gamma), budget.atomic_time)
        pulse = cavity.pulse_for_target(params, gamma, row.alpha_target, window=window)
        a2 = row.alpha_target ** 2
        v_raw = cavity.visibility_closed_form(params, pulse, a2)
        factor = cavity.truncation_correction(params, pulse, a2) if truncation else 1.0
        d = min_distance(budget, gamma)
        return RowRecord(
            name=row.name,
            g_MHz=row.g_MHz,
            kappa_MHz=row.kappa_MHz,
            Gamma_MHz=row.Gamma_MHz,
            f_cav=row.f_cav,
            kappa_b_MHz=row.kappa_b_MHz,
            kappa_c_MHz=row.kappa_c_MHz,
            kappa_L_MHz=row.kappa_L_MHz,
            cooperativity=params.cooperativity,
            gamma01_MHz=None if search.gamma is None else angular_to_mhz(search.gamma),
            gamma_eff_MHz=angular_to_mhz(gamma),
            spectral_factor=cavity.spectral_factor(params, pulse),
            V_untruncated=v_raw,
            V_oracle=cavity.visibility_overlap_oracle(params, pulse),
            truncation_factor=factor,
            V=v_raw * factor,
            alpha_in_sq=abs(pulse.alpha_in) ** 2,
            max_pe=cavity.max_excitation(params, pulse).max_pe,
            d_min_m=d,
            d_min_rounded_m=round_distance(d),
        )
    except Exception as exc:
        raise RowError(row.name, exc) from exc


def _record_job(args):
    return row_record(*args)


def table2_pipeline(rows=None, budget: TimingBudget = TimingBudget(), truncation=True, workers=None):
    """Records for each row, in input order."""
    rows = default_rows() if rows is None else list(rows)
    jobs = [(row, budget, truncation) for row in rows]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_record_job, jobs))
    return [_record_job(job) for job in jobs]


# ---------------------------------------------------------------- end to end


@dataclass(frozen=True)
class EndToEndResult:
    row: str
    V: float
    eta: float
    T: float
    value: float
    params: dict
    critical_T: float | None = None
    critical_eta: float | None = None


def end_to_end(row: CavityRow, eta, T, visibility=None, seed=0, n_starts=DEFAULT_STARTS,
               boundary=False, boundary_starts=16) -> EndToEndResult:
    """Visibility of ``row`` -> realistic state at ``alpha_target`` -> optimised CHSH.

    ``visibility`` overrides the computed value. With ``boundary`` the critical
    transmittance at ``eta`` and the critical efficiency at ``T`` are added.
    """
    V = row_record(row).V if visibility is None else visibility
    problem = realistic_problem(eta, T, visibility=V, alpha=row.alpha_target, seed=seed, n_starts=n_starts)
    best = optimize_chsh(problem)
    crit_T = crit_eta = None
    if boundary:
        template = realistic_problem(1.0, 1.0, visibility=V, alpha=row.alpha_target, seed=seed,
                                     n_starts=boundary_starts)
        crit_T = critical_transmission(eta, template).transmission
        crit_eta = critical_efficiency(T, template).eta
    return EndToEndResult(row=row.name, V=V, eta=eta, T=T, value=best.value, params=best.params,
                          critical_T=crit_T, critical_eta=crit_eta)


__all__ = [
    "TimingBudget", "pulse_duration", "min_distance", "CavityRow", "parse_rows", "load_rows",
    "default_rows", "RowRecord", "row_record", "table2_pipeline", "EndToEndResult", "end_to_end",
    "effective_bandwidth",
]
