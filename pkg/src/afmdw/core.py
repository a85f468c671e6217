"""Core types: parameter vectors, optimizer state, stepsize schedules,
run configuration, and config validation.

A run is described by a RunConfig, which the CLI reads from an INI file with
sections [problem], [optimizer], [schedules], [diagnostics]. Every key has a
default; unknown sections or keys are hard errors. validate_config checks the
hypotheses the convergence guarantees rest on and returns a report instead of
throwing, so callers can decide (strict mode refuses to run on violations,
--force downgrades them to warnings).
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError
from .estimators import EstimatorScheme

# ---------------------------------------------------------------------------
# parameter vectors and optimizer state

ParamVector = np.ndarray  # flat float64 coordinate vector


def as_param_vector(values, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-D float64 array, optionally checking its length."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ConfigError(f"parameter vector must be 1-D and nonempty, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ConfigError("parameter vector has non-finite entries")
    if dim is not None and x.size != dim:
        raise ConfigError(f"expected dimension {dim}, got {x.size}")
    return x


@dataclass
class OptimizerState:
    """The (x, m, v) triple after k steps."""

    x: np.ndarray
    m: np.ndarray
    v: np.ndarray
    k: int = 0

    def copy(self) -> "OptimizerState":
        return OptimizerState(self.x.copy(), self.m.copy(), self.v.copy(), self.k)


# ---------------------------------------------------------------------------
# stepsize schedules
#
# Each family carries symbolic flags used by validate_config:
#   inf_positive  -- inf_k value > 0
#   sum_diverges  -- sum_k value = infinity
#   log_decay     -- value_k * log(k) -> 0
# The flags describe the infinite sequence, not a finite prefix.


@dataclass(frozen=True)
class ConstantSchedule:
    value: float
    family = "constant"
    inf_positive = True
    sum_diverges = True
    log_decay = False

    def __post_init__(self):
        if not self.value > 0.0:
            raise ConfigError(f"constant schedule needs value > 0, got {self.value}")

    def array(self, n: int) -> np.ndarray:
        return np.full(n, self.value, dtype=np.float64)

    def eval(self, k: int) -> float:
        return self.value

    @property
    def sup(self) -> float:
        return self.value

    def describe(self) -> str:
        return f"constant:{self.value:g}"


@dataclass(frozen=True)
class PowerSchedule:
    """value_k = theta0 / (k+1)^gamma with gamma in (0, 1]."""

    theta0: float
    gamma: float
    family = "power"
    inf_positive = False
    sum_diverges = True  # guaranteed by gamma <= 1
    log_decay = True

    def __post_init__(self):
        if not self.theta0 > 0.0:
            raise ConfigError(f"power schedule needs theta0 > 0, got {self.theta0}")
        if not (0.0 < self.gamma <= 1.0):
            raise ConfigError(f"power schedule needs gamma in (0,1], got {self.gamma}")

    def array(self, n: int) -> np.ndarray:
        k = np.arange(n, dtype=np.float64)
        return self.theta0 * (k + 1.0) ** (-self.gamma)

    def eval(self, k: int) -> float:
        return float(self.theta0 * np.float64(k + 1.0) ** np.float64(-self.gamma))

    @property
    def sup(self) -> float:
        return self.theta0

    def describe(self) -> str:
        return f"power:{self.theta0:g},{self.gamma:g}"


@dataclass(frozen=True)
class EpochLogSchedule:
    """Constant within epochs of steps_per_epoch iterations, decaying as
    value(epoch s) = theta0 / (ln(s+2))^{3/2}  (natural log)."""

    theta0: float
    steps_per_epoch: int
    family = "epoch-log"
    inf_positive = False
    sum_diverges = True
    log_decay = True

    def __post_init__(self):
        if not self.theta0 > 0.0:
            raise ConfigError(f"epoch-log schedule needs theta0 > 0, got {self.theta0}")
        if self.steps_per_epoch < 1:
            raise ConfigError(
                f"epoch-log schedule needs steps_per_epoch >= 1, got {self.steps_per_epoch}"
            )

    def array(self, n: int) -> np.ndarray:
        s = np.arange(n, dtype=np.int64) // self.steps_per_epoch
        return self.theta0 / np.log(s.astype(np.float64) + 2.0) ** 1.5

    def eval(self, k: int) -> float:
        s = k // self.steps_per_epoch
        return float(self.theta0 / np.log(np.float64(s) + 2.0) ** np.float64(1.5))

    @property
    def sup(self) -> float:
        return self.eval(0)

    def describe(self) -> str:
        return f"epoch-log:{self.theta0:g},{self.steps_per_epoch}"


@dataclass(frozen=True)
class ScaledSchedule:
    """value_k = tau * base_k (used to tie one schedule to another, e.g.
    momentum stepsize = tau1 * x-stepsize in single-timescale runs)."""

    tau: float
    base: "StepsizeSchedule"

    family = "scaled"

    def __post_init__(self):
        if not self.tau > 0.0:
            raise ConfigError(f"scaled schedule needs tau > 0, got {self.tau}")

    @property
    def inf_positive(self) -> bool:
        return self.base.inf_positive

    @property
    def sum_diverges(self) -> bool:
        return self.base.sum_diverges

    @property
    def log_decay(self) -> bool:
        return self.base.log_decay

    def array(self, n: int) -> np.ndarray:
        return self.tau * self.base.array(n)

    def eval(self, k: int) -> float:
        return float(np.float64(self.tau) * np.float64(self.base.eval(k)))

    @property
    def sup(self) -> float:
        return self.tau * self.base.sup

    def describe(self) -> str:
        return f"scaled:{self.tau:g},{self.base.describe()}"


StepsizeSchedule = ConstantSchedule | PowerSchedule | EpochLogSchedule | ScaledSchedule

_FAMILY_ALIASES = {
    "constant": "constant",
    "const": "constant",
    "power": "power",
    "epoch-log": "epoch-log",
    "epochlog": "epoch-log",
    "epoch_log": "epoch-log",
    "scaled": "scaled",
    "linear-multiple": "scaled",
}


def make_schedule(family: str, params) -> StepsizeSchedule:
    """Build a schedule from a family name and parameter tuple.

    constant: (value,)   power: (theta0, gamma)
    epoch-log: (theta0, steps_per_epoch)   scaled: (tau, base_schedule)
    """
    fam = _FAMILY_ALIASES.get(family.strip().lower())
    if fam is None:
        raise ConfigError(f"unknown schedule family {family!r}")
    try:
        if fam == "constant":
            (value,) = params
            return ConstantSchedule(float(value))
        if fam == "power":
            theta0, gamma = params
            return PowerSchedule(float(theta0), float(gamma))
        if fam == "epoch-log":
            theta0, spe = params
            return EpochLogSchedule(float(theta0), int(spe))
        tau, base = params
        if not isinstance(base, (ConstantSchedule, PowerSchedule, EpochLogSchedule, ScaledSchedule)):
            raise ConfigError("scaled schedule needs a base schedule as second parameter")
        return ScaledSchedule(float(tau), base)
    except ValueError as e:
        raise ConfigError(f"bad parameters {params!r} for schedule family {family!r}: {e}") from e


def parse_schedule(spec: str) -> StepsizeSchedule:
    """Parse 'family:p1,p2' (scaled nests: 'scaled:2.0,power:0.1,0.7')."""
    spec = spec.strip()
    if ":" not in spec:
        raise ConfigError(f"schedule spec {spec!r} must look like 'family:params'")
    family, rest = spec.split(":", 1)
    fam = _FAMILY_ALIASES.get(family.strip().lower())
    if fam is None:
        raise ConfigError(f"unknown schedule family {family!r}")
    if fam == "scaled":
        if "," not in rest:
            raise ConfigError(f"scaled schedule spec {spec!r} needs 'scaled:tau,<base spec>'")
        tau, base_spec = rest.split(",", 1)
        return make_schedule("scaled", (float(tau), parse_schedule(base_spec)))
    parts = [p for p in rest.split(",") if p.strip() != ""]
    return make_schedule(fam, tuple(parts))


# ---------------------------------------------------------------------------
# run configuration

STEPPERS = ("afmdw", "adamd", "st", "adam-coupled", "adamw")


@dataclass(frozen=True)
class DiagnosticsConfig:
    record_history: bool = False
    gap_every: int = 0  # 0 disables stationarity-gap sampling
    gap_delta: float | None = None  # None = derive from the residual bound


@dataclass(frozen=True)
class RunConfig:
    problem_id: str = "abs1d"
    problem_params: tuple = ()  # sorted (key, value) pairs, values str
    stepper: str = "adamd"
    scheme: EstimatorScheme = field(default_factory=lambda: EstimatorScheme("adam", epsilon=1.0))
    sigma: float = 0.1
    tau1: float = 1.0
    tau2: float = 4.0
    eta: StepsizeSchedule = field(default_factory=lambda: ConstantSchedule(0.05))
    theta: StepsizeSchedule = field(default_factory=lambda: PowerSchedule(0.1, 0.7))
    beta: StepsizeSchedule = field(default_factory=lambda: ConstantSchedule(1e-4))
    max_iters: int = 10_000
    seed: int = 1
    strict: bool = True
    x0: tuple | None = None  # explicit start; None = seeded uniform [-1,1]^n
    x0_scale: float = 1.0
    m0: tuple | None = None  # None = zeros
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)

    def __post_init__(self):
        if self.stepper not in STEPPERS:
            raise ConfigError(f"unknown stepper {self.stepper!r}")
        if not self.sigma > 0.0:
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if not (self.tau1 > 0.0 and self.tau2 > 0.0):
            raise ConfigError("tau1 and tau2 must be positive")

    def problem_param(self, key: str, default=None):
        for k, v in self.problem_params:
            if k == key:
                return v
        return default


# ---------------------------------------------------------------------------
# INI config files

_DEFAULT_INI = {
    "problem": {
        "id": "abs1d",
        "dim": "",  # problems with a free dimension (quad)
        "c": "-1; 1",  # l1quad component centers, rows ';', coords ','
        "a": "1,0; -1,0; 0,1",  # maxpiece2d piece gradients
        "b": "0, 0, 0",  # maxpiece2d piece offsets
        "data_seed": "1234",  # relu_mlp dataset seed
        "sampling": "single",  # single | full
    },
    "optimizer": {
        "stepper": "adamd",
        "scheme": "adam",
        "sigma": "0.1",
        "epsilon": "1.0",
        "beta1": "1e-4",
        "clamp_lo": "0.1",
        "clamp_hi": "10.0",
        "literal_clamp": "false",
        "tau1": "1.0",
        "tau2": "4.0",
        "max_iters": "10000",
        "seed": "1",
        "strict": "true",
        "x0": "",
        "x0_scale": "1.0",
        "m0": "",
    },
    "schedules": {
        "eta": "constant:0.05",
        "theta": "power:0.1,0.7",
        "beta": "constant:1e-4",
    },
    "diagnostics": {
        "record_history": "false",
        "gap_every": "0",
        "gap_delta": "auto",
    },
}


def _parse_bool(s: str, key: str) -> bool:
    t = s.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"key {key}: expected a boolean, got {s!r}")


def _parse_vector(s: str) -> tuple | None:
    s = s.strip()
    if not s:
        return None
    try:
        return tuple(float(p) for p in s.replace(";", ",").split(",") if p.strip() != "")
    except ValueError as e:
        raise ConfigError(f"bad vector literal {s!r}: {e}") from e


def load_config(path: str | None = None, overrides: list[str] | None = None) -> RunConfig:
    """Read an INI config file and apply 'section.key=value' overrides.

    Missing file sections fall back to defaults; unknown sections or keys are
    errors, as are malformed values.
    """
    values = {sec: dict(keys) for sec, keys in _DEFAULT_INI.items()}

    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from e
        except configparser.Error as e:
            raise ConfigError(f"malformed config file {path}: {e}") from e
        for sec in parser.sections():
            if sec not in values:
                raise ConfigError(f"unknown config section [{sec}]")
            for key, val in parser.items(sec):
                if key not in values[sec]:
                    raise ConfigError(f"unknown config key {sec}.{key}")
                values[sec][key] = val

    for ov in overrides or []:
        if "=" not in ov:
            raise ConfigError(f"override {ov!r} must look like section.key=value")
        dotted, val = ov.split("=", 1)
        if "." not in dotted:
            raise ConfigError(f"override key {dotted!r} must look like section.key")
        sec, key = dotted.split(".", 1)
        sec, key = sec.strip(), key.strip()
        if sec not in values or key not in values[sec]:
            raise ConfigError(f"unknown config key {sec}.{key}")
        values[sec][key] = val

    return _config_from_values(values)


def _config_from_values(values: dict) -> RunConfig:
    p, o, s, d = values["problem"], values["optimizer"], values["schedules"], values["diagnostics"]
    try:
        scheme = EstimatorScheme(
            kind=o["scheme"].strip().lower(),
            beta1=float(o["beta1"]),
            epsilon=float(o["epsilon"]),
            clamp_lo=float(o["clamp_lo"]),
            clamp_hi=float(o["clamp_hi"]),
            literal_clamp=_parse_bool(o["literal_clamp"], "optimizer.literal_clamp"),
        )
        gap_delta_s = d["gap_delta"].strip().lower()
        diag = DiagnosticsConfig(
            record_history=_parse_bool(d["record_history"], "diagnostics.record_history"),
            gap_every=int(d["gap_every"]),
            gap_delta=None if gap_delta_s in ("", "auto") else float(d["gap_delta"]),
        )
        problem_params = tuple(
            sorted((k, v.strip()) for k, v in p.items() if k != "id" and v.strip() != "")
        )
        return RunConfig(
            problem_id=p["id"].strip().lower(),
            problem_params=problem_params,
            stepper=o["stepper"].strip().lower(),
            scheme=scheme,
            sigma=float(o["sigma"]),
            tau1=float(o["tau1"]),
            tau2=float(o["tau2"]),
            eta=parse_schedule(s["eta"]),
            theta=parse_schedule(s["theta"]),
            beta=parse_schedule(s["beta"]),
            max_iters=int(o["max_iters"]),
            seed=int(o["seed"]),
            strict=_parse_bool(o["strict"], "optimizer.strict"),
            x0=_parse_vector(o["x0"]),
            x0_scale=float(o["x0_scale"]),
            m0=_parse_vector(o["m0"]),
            diagnostics=diag,
        )
    except ConfigError:
        raise
    except (ValueError, KeyError) as e:
        raise ConfigError(f"bad config value: {e}") from e


def config_echo(cfg: RunConfig) -> str:
    """Flat key=value echo of a config, for summary files."""
    out = io.StringIO()
    out.write(f"problem.id = {cfg.problem_id}\n")
    for k, v in cfg.problem_params:
        out.write(f"problem.{k} = {v}\n")
    sch = cfg.scheme
    out.write(f"optimizer.stepper = {cfg.stepper}\n")
    out.write(f"optimizer.scheme = {sch.kind}\n")
    out.write(f"optimizer.sigma = {cfg.sigma:.17g}\n")
    out.write(f"optimizer.epsilon = {sch.epsilon:.17g}\n")
    out.write(f"optimizer.beta1 = {sch.beta1:.17g}\n")
    if sch.kind == "adabound":
        out.write(f"optimizer.clamp_lo = {sch.clamp_lo:.17g}\n")
        out.write(f"optimizer.clamp_hi = {sch.clamp_hi:.17g}\n")
        out.write(f"optimizer.literal_clamp = {sch.literal_clamp}\n")
    if cfg.stepper == "st":
        out.write(f"optimizer.tau1 = {cfg.tau1:.17g}\n")
        out.write(f"optimizer.tau2 = {cfg.tau2:.17g}\n")
    out.write(f"optimizer.max_iters = {cfg.max_iters}\n")
    out.write(f"optimizer.seed = {cfg.seed}\n")
    out.write(f"optimizer.strict = {cfg.strict}\n")
    if cfg.x0 is not None:
        out.write(f"optimizer.x0 = {','.join(f'{t:.17g}' for t in cfg.x0)}\n")
    else:
        out.write(f"optimizer.x0_scale = {cfg.x0_scale:.17g}\n")
    if cfg.m0 is not None:
        out.write(f"optimizer.m0 = {','.join(f'{t:.17g}' for t in cfg.m0)}\n")
    out.write(f"schedules.eta = {cfg.eta.describe()}\n")
    out.write(f"schedules.theta = {cfg.theta.describe()}\n")
    out.write(f"schedules.beta = {cfg.beta.describe()}\n")
    out.write(f"diagnostics.record_history = {cfg.diagnostics.record_history}\n")
    out.write(f"diagnostics.gap_every = {cfg.diagnostics.gap_every}\n")
    gd = cfg.diagnostics.gap_delta
    out.write(f"diagnostics.gap_delta = {'auto' if gd is None else f'{gd:.17g}'}\n")
    return out.getvalue()


# ---------------------------------------------------------------------------
# hypothesis validation


@dataclass(frozen=True)
class HypothesisCheck:
    ident: str
    status: str  # "satisfied" | "violated" | "unknown"
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    mode: str
    checks: tuple[HypothesisCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.status != "violated" for c in self.checks)

    @property
    def violated(self) -> tuple[str, ...]:
        return tuple(c.ident for c in self.checks if c.status == "violated")

    def summary(self) -> str:
        lines = [f"mode: {self.mode}"]
        for c in self.checks:
            lines.append(f"  [{c.status:9s}] {c.ident}: {c.detail}")
        return "\n".join(lines)


def mode_for_stepper(stepper: str) -> str:
    if stepper in ("afmdw", "adamd"):
        return "non-diminishing"
    if stepper == "st":
        return "single-timescale"
    return "baseline"


def validate_config(
    cfg: RunConfig,
    oracle_bounds: tuple[float, float] | None = None,
    bounds_exact: bool = True,
) -> ValidationReport:
    """Check the convergence hypotheses a config claims to run under.

    oracle_bounds = (M_f, M_xi): a bound on exact subgradient norms and on the
    sampling-noise norms. None (or infinities) marks the bound-dependent
    checks unknown rather than violated. Pure: reports only, never raises on
    violations.
    """
    from .estimators import bound_certificate  # local import keeps module load light

    mode = mode_for_stepper(cfg.stepper)
    checks: list[HypothesisCheck] = []
    tag = "" if bounds_exact else " (estimated bound)"

    m_f = m_xi = math.inf
    if oracle_bounds is not None:
        m_f, m_xi = float(oracle_bounds[0]), float(oracle_bounds[1])
    have_bounds = math.isfinite(m_f) and math.isfinite(m_xi)

    if mode == "baseline":
        return ValidationReport(mode, ())

    if mode == "non-diminishing":
        # (1) preconditioner range certificate
        if have_bounds:
            eps_v, m_v = bound_certificate(cfg.scheme, m_f, m_xi)
            checks.append(
                HypothesisCheck(
                    "preconditioner-range",
                    "satisfied",
                    f"certified {eps_v:.6g} <= H(v) <= {m_v:.6g} for gradient streams "
                    f"bounded by {m_f + m_xi:.6g}{tag}",
                )
            )
        else:
            eps_v = m_v = math.nan
            checks.append(
                HypothesisCheck(
                    "preconditioner-range",
                    "unknown",
                    "no finite subgradient bound available for this problem",
                )
            )

        # (2) iterate boundedness: checked a posteriori along runs
        checks.append(
            HypothesisCheck(
                "iterate-boundedness",
                "unknown",
                "not machine-checkable a priori; runs assert the realized growth bound",
            )
        )

        # (3) stepsize conditions
        if cfg.eta.inf_positive:
            checks.append(
                HypothesisCheck("eta-floor", "satisfied", f"inf eta = {cfg.eta.sup:.6g} > 0")
            )
        else:
            checks.append(
                HypothesisCheck(
                    "eta-floor",
                    "violated",
                    f"x-stepsizes from family '{cfg.eta.family}' decay to 0; this mode "
                    "needs inf eta > 0",
                )
            )
        if have_bounds:
            ceiling = 2.0 / (cfg.sigma * m_v)
            if cfg.eta.sup < ceiling:
                checks.append(
                    HypothesisCheck(
                        "eta-ceiling",
                        "satisfied",
                        f"sup eta = {cfg.eta.sup:.6g} < 2/(sigma*M_v) = {ceiling:.6g}{tag}",
                    )
                )
            else:
                checks.append(
                    HypothesisCheck(
                        "eta-ceiling",
                        "violated",
                        f"sup eta = {cfg.eta.sup:.6g} >= 2/(sigma*M_v) = {ceiling:.6g}; "
                        "the x-update may not contract the decay term",
                    )
                )
        else:
            checks.append(
                HypothesisCheck(
                    "eta-ceiling", "unknown", "needs a finite preconditioner certificate"
                )
            )
        checks.append(
            HypothesisCheck(
                "theta-sum-diverges",
                "satisfied" if cfg.theta.sum_diverges else "violated",
                f"momentum stepsizes from family '{cfg.theta.family}' "
                + ("have a divergent sum" if cfg.theta.sum_diverges else "are summable"),
            )
        )
        checks.append(
            HypothesisCheck(
                "theta-log-decay",
                "satisfied" if cfg.theta.log_decay else "violated",
                f"theta_k*log(k) -> 0 "
                + ("holds" if cfg.theta.log_decay else "fails")
                + f" for family '{cfg.theta.family}'",
            )
        )

        if cfg.stepper == "adamd":
            if cfg.scheme.kind != "adam":
                checks.append(
                    HypothesisCheck(
                        "adamd-scheme",
                        "violated",
                        f"adamd requires the adam estimator kind, got '{cfg.scheme.kind}'",
                    )
                )
            if cfg.eta.family != "constant":
                checks.append(
                    HypothesisCheck(
                        "adamd-eta-constant",
                        "violated",
                        f"adamd takes a constant x-stepsize, got family '{cfg.eta.family}'",
                    )
                )
            cap = 1.0 / (cfg.sigma * cfg.scheme.epsilon)
            if cfg.eta.sup <= cap:
                checks.append(
                    HypothesisCheck(
                        "adamd-eta-cap",
                        "satisfied",
                        f"eta = {cfg.eta.sup:.6g} <= 1/(sigma*epsilon) = {cap:.6g}",
                    )
                )
            else:
                checks.append(
                    HypothesisCheck(
                        "adamd-eta-cap",
                        "violated",
                        f"eta = {cfg.eta.sup:.6g} > 1/(sigma*epsilon) = {cap:.6g}",
                    )
                )

        # (4) oracle inexactness, (5) noise
        checks.append(
            HypothesisCheck(
                "oracle-exactness",
                "satisfied",
                "built-in oracles return exact component subgradient selections (delta_k = 0)",
            )
        )
        if have_bounds:
            checks.append(
                HypothesisCheck(
                    "noise-bounded",
                    "satisfied",
                    f"single-sample noise is a martingale difference bounded by "
                    f"2*M_f = {2.0 * m_f:.6g}{tag}",
                )
            )
        else:
            checks.append(
                HypothesisCheck(
                    "noise-bounded", "unknown", "no finite subgradient bound available"
                )
            )
        return ValidationReport(mode, tuple(checks))

    # single-timescale mode
    if cfg.scheme.kind != "st":
        checks.append(
            HypothesisCheck(
                "estimator-form",
                "violated",
                f"single-timescale runs use the 'st' estimator kind, got '{cfg.scheme.kind}'",
            )
        )
    else:
        checks.append(
            HypothesisCheck(
                "estimator-form",
                "satisfied",
                "v-update is the relaxed moving average with clipped square-root preconditioner",
            )
        )
    checks.append(
        HypothesisCheck(
            "iterate-boundedness",
            "unknown",
            "not machine-checkable a priori; runs assert the realized growth bound",
        )
    )
    checks.append(
        HypothesisCheck(
            "eta-sum-diverges",
            "satisfied" if cfg.eta.sum_diverges else "violated",
            f"x-stepsizes from family '{cfg.eta.family}' "
            + ("have a divergent sum" if cfg.eta.sum_diverges else "are summable"),
        )
    )
    checks.append(
        HypothesisCheck(
            "eta-log-decay",
            "satisfied" if cfg.eta.log_decay else "violated",
            "eta_k*log(k) -> 0 "
            + ("holds" if cfg.eta.log_decay else "fails")
            + f" for family '{cfg.eta.family}'",
        )
    )
    if cfg.tau2 >= 4.0 * cfg.tau1 and cfg.tau1 > 0.0:
        checks.append(
            HypothesisCheck(
                "timescale-ratio",
                "satisfied",
                f"tau2 = {cfg.tau2:.6g} >= 4*tau1 = {4.0 * cfg.tau1:.6g} (boundary allowed)",
            )
        )
    else:
        checks.append(
            HypothesisCheck(
                "timescale-ratio",
                "violated",
                f"need tau2 >= 4*tau1 > 0, got tau1 = {cfg.tau1:.6g}, tau2 = {cfg.tau2:.6g}",
            )
        )
    cap_sup = cfg.tau2 * cfg.eta.sup
    if cap_sup <= 1.0:
        checks.append(
            HypothesisCheck(
                "estimator-stepsize-cap",
                "satisfied",
                f"tau2*sup(eta) = {cap_sup:.6g} <= 1, v stays in the hull of its inputs",
            )
        )
    elif not cfg.eta.inf_positive:
        # diminishing eta: the cap is violated only on a finite prefix; the
        # preconditioner clips negative transients, so report rather than gate
        k0 = 0
        while cfg.tau2 * cfg.eta.eval(k0) > 1.0 and k0 < 10_000_000:
            k0 += 1
        checks.append(
            HypothesisCheck(
                "estimator-stepsize-cap",
                "satisfied",
                f"tau2*eta_k <= 1 from k = {k0} on; earlier steps may overshoot and are "
                "handled by clipping v at 0",
            )
        )
    else:
        checks.append(
            HypothesisCheck(
                "estimator-stepsize-cap",
                "violated",
                f"tau2*eta = {cap_sup:.6g} > 1 for all k; the v-update is unstable",
            )
        )
    checks.append(
        HypothesisCheck(
            "oracle-exactness",
            "satisfied",
            "built-in oracles return exact component subgradient selections (delta_k = 0)",
        )
    )
    if have_bounds:
        checks.append(
            HypothesisCheck(
                "noise-bounded",
                "satisfied",
                f"single-sample noise is a martingale difference bounded by 2*M_f = {2.0 * m_f:.6g}{tag}",
            )
        )
    else:
        checks.append(
            HypothesisCheck("noise-bounded", "unknown", "no finite subgradient bound available")
        )
    return ValidationReport(mode, tuple(checks))


__all__ = [
    "ParamVector",
    "as_param_vector",
    "OptimizerState",
    "ConstantSchedule",
    "PowerSchedule",
    "EpochLogSchedule",
    "ScaledSchedule",
    "StepsizeSchedule",
    "make_schedule",
    "parse_schedule",
    "DiagnosticsConfig",
    "RunConfig",
    "load_config",
    "config_echo",
    "HypothesisCheck",
    "ValidationReport",
    "validate_config",
    "mode_for_stepper",
    "STEPPERS",
    "replace",
]
