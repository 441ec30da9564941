"""Strict JSON experiment configuration."""

import itertools
import json
import math
from dataclasses import dataclass, field

from ..errors import InputError
from ..model import SUBSPACE, WISHART

ALGORITHM_NAMES = ("dt", "ct", "svd", "svd2", "svd4", "svd6", "sdp", "poly")
ADVERSARY_TYPES = ("none", "whitening", "dt", "ct")

GRID_KEYS = {
    WISHART: ("n", "d", "k", "beta"),
    SUBSPACE: ("n", "d", "lambda", "delta", "s"),
}


# reference signal strengths; a grid of multipliers is scaled by one of these
BETA_RULES = {
    "bbp": lambda n, d, k: math.sqrt(d / n),
    "dt": lambda n, d, k: k / math.sqrt(n) * math.sqrt(math.log(d)),
    "dt_log_dk": lambda n, d, k: k / math.sqrt(n) * math.sqrt(math.log(d / k)),
    "ct": lambda n, d, k: k / math.sqrt(n) * math.sqrt(max(1.0, math.log(d / k**2))),
    "wishart_d_over_n": lambda n, d, k: d / n,
}

# adversary strengths as a function of the cell
B_RULES = {
    "dt": lambda n, d, k, beta: beta * math.sqrt(n) / k + math.sqrt(math.log(d)),
    "ct": lambda n, d, k, beta: (n * math.log(d)) ** 0.25 / math.sqrt(k),
}
R_RULES = {
    "2lnd": lambda n, d: math.ceil(2 * math.log(d)),
}


def _strict(data, allowed, where):
    if not isinstance(data, dict):
        raise InputError(f"{where}: expected an object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise InputError(f"{where}: unknown key(s) {', '.join(unknown)}")


@dataclass(frozen=True)
class AlgoSpec:
    name: str
    options: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data):
        if isinstance(data, str):
            data = {"name": data}
        _strict(data, ("name", "options"), "algorithm")
        name = data.get("name")
        if name not in ALGORITHM_NAMES:
            raise InputError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHM_NAMES)}")
        options = data.get("options", {})
        if not isinstance(options, dict):
            raise InputError("algorithm options must be an object")
        return cls(name, dict(options))


@dataclass(frozen=True)
class AdversaryConfig:
    type: str = "none"
    b: float = None
    b_rule: str = None
    b_factor: float = 1.0
    r: int = None
    r_rule: str = None

    def __post_init__(self):
        if self.type not in ADVERSARY_TYPES:
            raise InputError(f"unknown adversary type {self.type!r}")
        if self.b_rule is not None and self.b_rule not in B_RULES:
            raise InputError(f"unknown b_rule {self.b_rule!r}")
        if self.r_rule is not None and self.r_rule not in R_RULES:
            raise InputError(f"unknown r_rule {self.r_rule!r}")
        if self.type in ("dt", "ct") and self.b is None and self.b_rule is None:
            raise InputError(f"adversary {self.type!r} needs b or b_rule")

    @classmethod
    def from_dict(cls, data):
        if data is None:
            return cls()
        _strict(data, ("type", "b", "b_rule", "b_factor", "r", "r_rule"), "adversary")
        return cls(**data)

    def strength(self, n, d, k, beta):
        if self.b is not None:
            return float(self.b)
        return self.b_factor * B_RULES[self.b_rule](n, d, k, beta)

    def blocks(self, n, d):
        if self.r is not None:
            return int(self.r)
        if self.r_rule is not None:
            return R_RULES[self.r_rule](n, d)
        return 1


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    form: str
    grid: dict
    algorithms: tuple
    adversary: AdversaryConfig = AdversaryConfig()
    trials: int = 20
    seed: int = 0
    x: str = None
    beta_rule: str = None
    signal_mode: str = "flat"
    working: tuple = ()
    csv: str = None
    svg: str = None
    # wall-clock runtimes make CSVs differ between runs; off writes 0
    timing: bool = True

    def __post_init__(self):
        if self.form not in GRID_KEYS:
            raise InputError(f"unknown form {self.form!r}")
        keys = GRID_KEYS[self.form]
        _strict(self.grid, keys, "grid")
        missing = [k for k in keys if k not in self.grid]
        if missing:
            raise InputError(f"grid is missing {', '.join(missing)}")
        for key, vals in self.grid.items():
            if not isinstance(vals, list) or not vals:
                raise InputError(f"grid[{key!r}] must be a nonempty list")
        if not self.algorithms:
            raise InputError("at least one algorithm is required")
        if self.trials < 1:
            raise InputError("trials must be >= 1")
        if self.x is not None and self.x not in keys:
            raise InputError(f"x must be one of the grid keys {keys}")
        if self.beta_rule is not None and self.beta_rule not in BETA_RULES:
            raise InputError(f"unknown beta_rule {self.beta_rule!r}")
        if self.form == SUBSPACE and self.adversary.type != "none":
            raise InputError("the subspace form carries its own perturbation; adversary must be none")
        unknown = set(self.working) - {a.name for a in self.algorithms}
        if unknown:
            raise InputError(f"working lists algorithms not in the run: {sorted(unknown)}")

    _FIELDS = (
        "name",
        "form",
        "grid",
        "algorithms",
        "adversary",
        "trials",
        "seed",
        "x",
        "beta_rule",
        "signal_mode",
        "working",
        "csv",
        "svg",
        "timing",
    )

    @classmethod
    def from_dict(cls, data):
        _strict(data, cls._FIELDS, "config")
        for req in ("name", "form", "grid", "algorithms"):
            if req not in data:
                raise InputError(f"config is missing {req!r}")
        kw = dict(data)
        kw["algorithms"] = tuple(AlgoSpec.from_dict(a) for a in data["algorithms"])
        kw["adversary"] = AdversaryConfig.from_dict(data.get("adversary"))
        kw["working"] = tuple(data.get("working", ()))
        kw["grid"] = {k: list(v) if isinstance(v, list) else v for k, v in data["grid"].items()}
        return cls(**kw)

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self):
        return {
            "name": self.name,
            "form": self.form,
            "grid": self.grid,
            "algorithms": [{"name": a.name, "options": a.options} for a in self.algorithms],
            "adversary": {k: v for k, v in vars(self.adversary).items()},
            "trials": self.trials,
            "seed": self.seed,
            "x": self.x,
            "beta_rule": self.beta_rule,
            "signal_mode": self.signal_mode,
            "working": list(self.working),
            "csv": self.csv,
            "svg": self.svg,
            "timing": self.timing,
        }

    def cells(self):
        """Grid cells in a fixed order (cartesian product over the grid keys)."""
        keys = GRID_KEYS[self.form]
        out = []
        for combo in itertools.product(*(self.grid[k] for k in keys)):
            cell = dict(zip(keys, combo))
            if self.form == WISHART:
                cell["n"], cell["d"], cell["k"] = int(cell["n"]), int(cell["d"]), int(cell["k"])
                cell["multiplier"] = cell["beta"]
                if self.beta_rule is not None:
                    cell["beta"] = cell["beta"] * BETA_RULES[self.beta_rule](cell["n"], cell["d"], cell["k"])
            else:
                cell["n"], cell["d"] = int(cell["n"]), int(cell["d"])
            out.append(cell)
        return out
