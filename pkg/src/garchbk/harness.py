"""Experiment orchestration: config, seeding, replication, persistence.

An experiment is a grid of (n, replication) cells sharing one marginal
model.  Every cell derives its own 64-bit seed from the master seed by a
splitmix-style hash, simulates a fresh path, and computes the remainder
statistics; rows are written in canonical (n, rep) order so the output CSV
is byte-identical regardless of scheduling.
"""

import csv
import json
import math
import multiprocessing
import os
import time
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .bahadur import BkResult, bk_remainder, rate_constants, rate_fit
from .garch import GarchParams, NonStationaryError, is_stationary, simulate
from .innovations import InnovationModel
from .marginal import MarginalModel, build_marginal

CSV_COLUMNS = ("n", "rep", "seed", "r_uniform", "r_general", "sup_beta",
               "oscillation", "lil")

_MASK64 = (1 << 64) - 1
# the marginal build occupies this reserved cell so no path can collide
_MARGINAL_CELL = (0, _MASK64)


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, n: int, rep: int) -> int:
    """Deterministic per-cell seed, injective in practice over any grid."""
    z = _splitmix64(master_seed & _MASK64)
    z = _splitmix64(z ^ (n & _MASK64))
    return _splitmix64(z ^ (rep & _MASK64))


@dataclass(frozen=True)
class MarginalSettings:
    m_draws: int = 100_000
    gap: int = 50
    seed: int | None = None  # derived from the master seed when omitted


@dataclass(frozen=True)
class ExperimentConfig:
    params: GarchParams
    innovation: InnovationModel
    n_grid: tuple[int, ...]
    replications: int
    master_seed: int
    interval: tuple[float, float] = (0.05, 0.95)
    marginal: MarginalSettings = field(default_factory=MarginalSettings)
    burn_in: int = 10_000
    output_dir: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        if len(self.n_grid) < 1:
            raise ValueError("n_grid must not be empty")
        if any(n < 16 for n in self.n_grid):
            raise ValueError("every n must be at least 16")
        if any(b >= a for a, b in zip(self.n_grid[1:], self.n_grid)):
            raise ValueError("n_grid must be strictly increasing")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        y_lo, y_hi = self.interval
        if not 0.0 < y_lo < y_hi < 1.0:
            raise ValueError("interval must satisfy 0 < y_lo < y_hi < 1")

    def marginal_seed(self) -> int:
        if self.marginal.seed is not None:
            return self.marginal.seed
        return derive_seed(self.master_seed, *_MARGINAL_CELL)

    def cell_seed(self, n: int, rep: int) -> int:
        return derive_seed(self.master_seed, n, rep)


def load_config(path) -> ExperimentConfig:
    """Parse a TOML experiment file; unknown keys are errors."""
    with open(path, "rb") as fh:
        raw = tomllib.load(fh)
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ExperimentConfig:
    def take(section: dict, name: str, allowed: set[str], required: set[str]):
        unknown = set(section) - allowed
        if unknown:
            raise ValueError(f"unknown keys in [{name}]: {sorted(unknown)}")
        missing = required - set(section)
        if missing:
            raise ValueError(f"missing keys in [{name}]: {sorted(missing)}")

    take(raw, "top level", {"garch", "innovation", "experiment", "marginal"},
         {"garch", "innovation", "experiment"})
    g = raw["garch"]
    take(g, "garch", {"delta", "beta", "alpha"}, {"delta", "alpha"})
    params = GarchParams(delta=g["delta"], beta=tuple(g.get("beta", ())),
                         alpha=tuple(g["alpha"]))
    innovation = InnovationModel.from_spec(raw["innovation"])
    e = raw["experiment"]
    take(e, "experiment",
         {"n_grid", "replications", "master_seed", "interval", "burn_in",
          "output_dir"},
         {"n_grid", "replications", "master_seed"})
    m = raw.get("marginal", {})
    take(m, "marginal", {"m_draws", "gap", "seed"}, set())
    marginal = MarginalSettings(
        m_draws=int(m.get("m_draws", 100_000)),
        gap=int(m.get("gap", 50)),
        seed=None if m.get("seed") is None else int(m["seed"]),
    )
    return ExperimentConfig(
        params=params,
        innovation=innovation,
        n_grid=tuple(e["n_grid"]),
        replications=int(e["replications"]),
        master_seed=int(e["master_seed"]),
        interval=tuple(e.get("interval", (0.05, 0.95))),
        marginal=marginal,
        burn_in=int(e.get("burn_in", 10_000)),
        output_dir=e.get("output_dir"),
    )


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    rows: tuple[tuple[int, int, BkResult], ...]  # (n, rep, stats)
    summary: dict
    config: ExperimentConfig
    elapsed_seconds: float


def run_cell(config: ExperimentConfig, marginal: MarginalModel, n: int,
             rep: int) -> BkResult:
    """One (n, rep) cell: fresh path, remainder statistics.

    Depends only on (config, n, rep, marginal); stationarity was already
    checked once for the whole experiment.
    """
    path = simulate(config.params, config.innovation, n=n,
                    seed=config.cell_seed(n, rep), burn_in=config.burn_in,
                    check_stationarity=False)
    return bk_remainder(path, marginal, interval=config.interval)


_WORKER_CTX: dict = {}


def _pool_init(config, marginal):
    _WORKER_CTX["config"] = config
    _WORKER_CTX["marginal"] = marginal


def _pool_cell(cell):
    n, rep = cell
    return run_cell(_WORKER_CTX["config"], _WORKER_CTX["marginal"], n, rep)


def _format_row(n: int, rep: int, r: BkResult) -> str:
    vals = (n, rep, r.seed, r.r_uniform, r.r_general, r.sup_beta,
            r.oscillation, r.lil)
    return ",".join(repr(v) if isinstance(v, float) else str(v) for v in vals)


def rows_to_csv(rows) -> str:
    out = [",".join(CSV_COLUMNS)]
    out.extend(_format_row(n, rep, r) for n, rep, r in rows)
    return "\n".join(out) + "\n"


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentResult:
    """Run every (n, rep) cell and summarize.

    One marginal model is built up front and shared read-only by all cells.
    With ``workers > 1`` cells run in a fork-based process pool; results are
    collected in canonical order either way, so the CSV text is identical.
    When the config names an output directory, ``results.csv`` and
    ``summary.json`` are written there (atomically, via temp files).
    """
    t0 = time.perf_counter()
    verdict = is_stationary(config.params, config.innovation)
    if verdict.verdict != "stationary":
        raise NonStationaryError(
            f"experiment requires a stationary verdict, got {verdict.verdict!r} "
            f"(gamma_hat={verdict.gamma_hat:.4g})"
        )
    mseed = config.marginal_seed()
    cells = [(n, rep) for n in config.n_grid for rep in range(config.replications)]
    seeds = {config.cell_seed(n, rep) for n, rep in cells}
    if len(seeds) != len(cells) or mseed in seeds:
        raise RuntimeError("seed derivation collision across the cell grid")
    marginal = build_marginal(
        config.params, config.innovation, m_draws=config.marginal.m_draws,
        gap=config.marginal.gap, seed=mseed, burn_in=config.burn_in,
    )

    def in_order():
        if workers > 1:
            try:
                ctx = multiprocessing.get_context("fork")
            except ValueError:  # no fork on this platform: run sequentially
                ctx = None
            if ctx is not None:
                with ctx.Pool(workers, initializer=_pool_init,
                              initargs=(config, marginal)) as pool:
                    yield from pool.imap(_pool_cell, cells, chunksize=4)
                return
        for n, rep in cells:
            yield run_cell(config, marginal, n, rep)

    csv_path = tmp_path = fh = None
    if config.output_dir is not None:
        os.makedirs(config.output_dir, exist_ok=True)
        csv_path = os.path.join(config.output_dir, "results.csv")
        tmp_path = csv_path + ".tmp"
        fh = open(tmp_path, "w")
        fh.write(",".join(CSV_COLUMNS) + "\n")
    rows = []
    try:
        for (n, rep), r in zip(cells, in_order()):
            rows.append((n, rep, r))
            if fh is not None:
                fh.write(_format_row(n, rep, r) + "\n")
                fh.flush()
    except BaseException:
        if fh is not None:
            fh.close()
            os.unlink(tmp_path)
        raise
    rows = tuple(rows)
    summary = _summary_from_rows(rows)
    if fh is not None:
        fh.close()
        os.replace(tmp_path, csv_path)
        _write_atomic(os.path.join(config.output_dir, "summary.json"),
                      json.dumps(summary, indent=2, sort_keys=True) + "\n")
    elapsed = time.perf_counter() - t0
    return ExperimentResult(rows=rows, summary=summary, config=config,
                            elapsed_seconds=elapsed)


def _write_atomic(path: str, text: str):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _median_iqr(values: np.ndarray) -> dict:
    q1, med, q3 = np.percentile(values, [25.0, 50.0, 75.0])
    return {"median": float(med), "q1": float(q1), "q3": float(q3)}


_STATS = ("r_uniform", "r_general", "sup_beta", "oscillation", "lil")


def _summary_from_rows(rows) -> dict:
    by_n: dict[int, dict[str, list[float]]] = {}
    for n, _rep, r in rows:
        cell = by_n.setdefault(int(n), {s: [] for s in _STATS})
        for s in _STATS:
            cell[s].append(getattr(r, s))
    ns = sorted(by_n)
    per_n = {
        str(n): {s: _median_iqr(np.asarray(by_n[n][s])) for s in _STATS}
        for n in ns
    }
    ratios: dict[str, dict[str, float]] = {
        "r_uniform_over_r_n": {},
        "r_general_over_r_n": {},
        "oscillation_over_b_n_star": {},
        "oscillation_over_b_n": {},
        "sup_beta_over_sqrt_loglog": {},
    }
    for n in ns:
        rc = rate_constants(n)
        med = {s: float(np.median(by_n[n][s])) for s in _STATS}
        ratios["r_uniform_over_r_n"][str(n)] = med["r_uniform"] / rc.r_n
        ratios["r_general_over_r_n"][str(n)] = med["r_general"] / rc.r_n
        ratios["oscillation_over_b_n_star"][str(n)] = med["oscillation"] / rc.b_n_star
        ratios["oscillation_over_b_n"][str(n)] = med["oscillation"] / rc.b_n
        ratios["sup_beta_over_sqrt_loglog"][str(n)] = (
            med["sup_beta"] / math.sqrt(math.log(math.log(n)))
        )
    summary = {
        "n_values": ns,
        "rows": len(rows),
        "per_n": per_n,
        "ratios": ratios,
        "fits": {},
    }
    if len(ns) >= 3:
        for s in ("r_uniform", "r_general"):
            pairs = [(n, float(np.median(by_n[n][s]))) for n in ns]
            fit = rate_fit(pairs)
            summary["fits"][s] = {
                "exponent": fit.exponent,
                "intercept": fit.intercept,
            }
    else:
        summary["note"] = "insufficient n values for a rate fit (need >= 3)"
    return summary


def read_results_csv(path) -> list[tuple[int, int, BkResult]]:
    """Parse a results CSV back into rows; the schema must match exactly."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != CSV_COLUMNS:
            raise ValueError(
                f"results CSV must have columns {','.join(CSV_COLUMNS)}"
            )
        rows = []
        for line in reader:
            if len(line) != len(CSV_COLUMNS):
                raise ValueError(f"malformed row: {line!r}")
            n, rep, seed = int(line[0]), int(line[1]), int(line[2])
            vals = [float(v) for v in line[3:]]
            r = BkResult(n=n, seed=seed, r_uniform=vals[0], r_general=vals[1],
                         sup_beta=vals[2], oscillation=vals[3], lil=vals[4],
                         r_general_full=vals[1])
            rows.append((n, rep, r))
    if not rows:
        raise ValueError("results CSV has no data rows")
    return rows


def summarize(csv_path) -> dict:
    """Per-n medians and quartiles, ratio tables, and rate-fit exponents."""
    return _summary_from_rows(read_results_csv(csv_path))
