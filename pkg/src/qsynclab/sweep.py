"""Parameter grids, sweep execution, dataset assembly and persistence.

A dataset row holds one grid point: its index, the swept parameter values,
the early-time feature vector (the first ``n_early`` post-initial samples of
each qubit, interleaved sx1, sx2, sx1, ...) and the late-time Pearson target
computed over the final ``window`` samples.

Datasets are written as delimited text (one row per record, numbers with 17
significant digits so round-trips are exact) next to a JSON manifest that
pins the model, fixed parameters, grid, windows, seed and PRNG.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import collision, lindblad
from .errors import DatasetFormatError
from .metrics import dead_window_mask, pearson_rows
from .trajectory import VALUE_BOUND

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"
PRNG_NAME = "numpy-pcg64"
WORKERS_ENV_VAR = "QSYNCLAB_WORKERS"

# Fixed simulation chunk so results do not depend on the worker count.
CHUNK_SIZE = 2048


@dataclass(frozen=True, eq=False)
class SweepGrid:
    """Ordered parameter tuples of one sweep; row i is grid index i."""

    model: str
    param_names: tuple
    points: np.ndarray
    spec: dict = field(default_factory=dict)

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 2 or points.shape[1] != len(self.param_names):
            raise ValueError("points must be (N, len(param_names))")
        if len(np.unique(points, axis=0)) != len(points):
            raise ValueError("grid points must be unique")
        points.flags.writeable = False
        object.__setattr__(self, "points", points)

    @property
    def size(self) -> int:
        return len(self.points)


def _product_grid(model: str, axes: dict, subsample: int, name: str) -> SweepGrid:
    if subsample < 1:
        raise ValueError("subsample must be >= 1")
    arrays = [ax[::subsample] for ax in axes.values()]
    mesh = np.meshgrid(*arrays, indexing="ij")
    points = np.column_stack([m.ravel() for m in mesh])
    spec = {
        "name": name,
        "subsample": subsample,
        "axes": {k: {"count": len(a), "values_first": float(a[0]), "values_last": float(a[-1])}
                 for k, a in zip(axes, arrays)},
    }
    return SweepGrid(model, tuple(axes), points, spec)


def lcm_grid(subsample: int = 1) -> SweepGrid:
    """Detuning 0.97..1.03 step 0.0015 (41) x lambda from 0.01 step 0.002
    (25, upper endpoint excluded) x J from 0.05 step 0.01 (10, upper
    endpoint excluded): 10,250 points."""
    axes = {
        "omega_ratio": 0.97 + 0.0015 * np.arange(41),
        "lambda": 0.01 + 0.002 * np.arange(25),
        "j": 0.05 + 0.01 * np.arange(10),
    }
    return _product_grid("lcm", axes, subsample, "lcm-default")


def gcm_grid(subsample: int = 1) -> SweepGrid:
    """Detuning 0.93..1.08 step 0.002 (76) x lambda 0..0.01 inclusive step
    0.0002 (51): 3876 points."""
    axes = {
        "omega_ratio": 0.93 + 0.002 * np.arange(76),
        "lambda": np.linspace(0.0, 0.01, 51),
    }
    return _product_grid("gcm", axes, subsample, "gcm-default")


def me_grid(subsample: int = 1) -> SweepGrid:
    """Detuning 1.0..1.1 inclusive step 0.001 (101) x f12 0..0.05 inclusive
    step 0.001 (51): 5151 points."""
    axes = {
        "omega_ratio": np.linspace(1.0, 1.1, 101),
        "f12": np.linspace(0.0, 0.05, 51),
    }
    return _product_grid("me", axes, subsample, "me-default")


def default_grid(model: str, subsample: int = 1) -> SweepGrid:
    builders = {"lcm": lcm_grid, "gcm": gcm_grid, "me": me_grid}
    try:
        return builders[model](subsample)
    except KeyError:
        raise ValueError(f"unknown model {model!r}")


def perturb_grid(grid: SweepGrid, eps_max: float = 1e-4, seed: int = 0) -> SweepGrid:
    """Add independent uniform offsets in (-eps_max, eps_max) to the detuning
    and coupling columns (J and fixed parameters stay untouched)."""
    if eps_max < 0:
        raise ValueError("eps_max must be non-negative")
    points = grid.points.copy()
    if eps_max > 0:
        rng = np.random.default_rng(seed)
        points[:, :2] += rng.uniform(-eps_max, eps_max, size=(len(points), 2))
    spec = {"base": grid.spec, "perturb": {"eps_max": eps_max, "seed": seed}}
    return SweepGrid(grid.model, grid.param_names, points, spec)


def config_for_point(base, param_names: tuple, point: np.ndarray):
    """Concrete model config for one grid point; ``omega_ratio`` sets
    omega1 = ratio * omega2, other names override template fields."""
    updates = {}
    for name, value in zip(param_names, point):
        if name == "omega_ratio":
            updates["omega1"] = float(value) * base.omega2
        elif name == "lambda":
            updates["lam"] = float(value)
        else:
            updates[name] = float(value)
    return replace(base, **updates)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Sweep records plus the manifest that makes them reproducible."""

    model: str
    param_names: tuple
    grid_index: np.ndarray
    params: np.ndarray
    features: np.ndarray
    targets: np.ndarray
    manifest: dict

    def __post_init__(self):
        if not (len(self.grid_index) == len(self.params) == len(self.features) == len(self.targets)):
            raise ValueError("record arrays must have equal length")
        if "seed" not in self.manifest:
            raise ValueError("manifest must carry a seed")
        for arr in (self.grid_index, self.params, self.features, self.targets):
            np.asarray(arr).flags.writeable = False

    @property
    def n_early(self) -> int:
        return self.features.shape[1] // 2

    @property
    def size(self) -> int:
        return len(self.targets)


def _simulate_chunk(model: str, configs: list, rho0: np.ndarray, n_early: int, window: int):
    if model in ("lcm", "gcm"):
        return collision.simulate_batch(model, configs, rho0, head=n_early, tail=window)
    if model == "me":
        return lindblad.propagate_batch(configs, rho0, head=n_early, tail=window)
    raise ValueError(f"unknown model {model!r}")


def _chunk_worker(args):
    return _simulate_chunk(*args)


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV_VAR, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("ignoring invalid %s=%r", WORKERS_ENV_VAR, raw)
        return 1


def build_dataset(
    model: str,
    grid: SweepGrid,
    n_early: int,
    base_cfg,
    rho0: np.ndarray | None = None,
    window: int = 100,
    seed: int = 0,
    initial_state_label: str = "ideal",
) -> Dataset:
    """Simulate every grid point and assemble features and targets.

    Dead late windows (variance at the floor, i.e. a fully decayed
    trajectory) record an explicit target of 0 and are logged.
    """
    if model != grid.model:
        raise ValueError(f"grid is for model {grid.model!r}, not {model!r}")
    if n_early < 1:
        raise ValueError("n_early must be >= 1")
    if window < 2:
        raise ValueError("window must be >= 2")
    horizon = base_cfg.n_collisions if model in ("lcm", "gcm") else int(round(base_cfg.t_max / base_cfg.sample_dt))
    if horizon < max(n_early, window):
        raise ValueError("simulation horizon shorter than the feature/target windows")
    if rho0 is None:
        rho0 = collision.default_initial_state(model)

    configs = [config_for_point(base_cfg, grid.param_names, p) for p in grid.points]
    chunks = [(model, configs[lo:lo + CHUNK_SIZE], rho0, n_early, window)
              for lo in range(0, len(configs), CHUNK_SIZE)]
    workers = worker_count()
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers, mp_context=get_context("spawn")) as pool:
            results = list(pool.map(_chunk_worker, chunks))
    else:
        results = [_chunk_worker(c) for c in chunks]

    head1 = np.concatenate([r[0] for r in results])
    head2 = np.concatenate([r[1] for r in results])
    tail1 = np.concatenate([r[2] for r in results])
    tail2 = np.concatenate([r[3] for r in results])

    features = np.empty((grid.size, 2 * n_early))
    features[:, 0::2] = head1
    features[:, 1::2] = head2
    bound = np.abs(features).max(initial=0.0)
    if bound > VALUE_BOUND:
        raise ValueError(f"feature magnitude {bound} exceeds the physical bound")

    targets = pearson_rows(tail1, tail2, undefined="zero")
    dead = np.flatnonzero(dead_window_mask(tail1, tail2))
    if len(dead):
        logger.info("%s: %d fully decayed late window(s) recorded as C12=0 (first indices %s)",
                    model, len(dead), dead[:5].tolist())

    manifest = {
        "format_version": FORMAT_VERSION,
        "model": model,
        "param_names": list(grid.param_names),
        "grid": grid.spec or {"name": "custom", "size": grid.size},
        "grid_size": grid.size,
        "n_early": n_early,
        "window": window,
        "seed": seed,
        "prng": PRNG_NAME,
        "fixed": asdict(base_cfg),
        "initial_state": initial_state_label,
    }
    return Dataset(
        model=model,
        param_names=grid.param_names,
        grid_index=np.arange(grid.size, dtype=int),
        params=grid.points.copy(),
        features=features,
        targets=targets,
        manifest=manifest,
    )


@dataclass(frozen=True)
class NoiseSpec:
    """Additive measurement-noise model: x -> x + rate * u, u ~ U[-1, 1]."""

    rate: float
    seed: int

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("noise rate must be non-negative")
        if self.rate > 0.05:
            logger.warning("noise rate %.3f exceeds the benchmarked 0.05 range", self.rate)


def inject_noise(ds: Dataset, spec: NoiseSpec) -> Dataset:
    """Perturb every feature independently; targets stay untouched."""
    rng = np.random.default_rng(spec.seed)
    noisy = ds.features + spec.rate * rng.uniform(-1.0, 1.0, size=ds.features.shape)
    manifest = dict(ds.manifest)
    manifest["noise"] = {"rate": spec.rate, "seed": spec.seed, "prng": PRNG_NAME}
    return Dataset(ds.model, ds.param_names, ds.grid_index.copy(), ds.params.copy(),
                   noisy, ds.targets.copy(), manifest)


def with_n_early(ds: Dataset, n_early: int) -> Dataset:
    """View of a dataset truncated to a smaller feature window (the feature
    columns are a prefix: sx1_1, sx2_1, sx1_2, ...)."""
    if n_early > ds.n_early:
        raise ValueError(f"dataset holds only {ds.n_early} early samples")
    if n_early == ds.n_early:
        return ds
    manifest = dict(ds.manifest)
    manifest["n_early"] = n_early
    manifest["truncated_from"] = ds.n_early
    return Dataset(ds.model, ds.param_names, ds.grid_index.copy(), ds.params.copy(),
                   ds.features[:, : 2 * n_early].copy(), ds.targets.copy(), manifest)


def _columns(ds_or_manifest) -> list:
    m = ds_or_manifest if isinstance(ds_or_manifest, dict) else ds_or_manifest.manifest
    n_early = m["n_early"]
    return (["grid_index"] + list(m["param_names"])
            + [f"feat_{i:04d}" for i in range(2 * n_early)] + ["target_c12"])


def _manifest_path(path: Path) -> Path:
    return path.with_suffix(".manifest.json")


def save_dataset(ds: Dataset, path: str | Path) -> None:
    """Write the record table and its manifest next to each other."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = _columns(ds)
    table = np.column_stack([ds.grid_index.astype(float), ds.params, ds.features, ds.targets])
    fmt = ["%d"] + ["%.17g"] * (table.shape[1] - 1)
    np.savetxt(path, table, fmt=fmt, delimiter=",", header=",".join(cols), comments="")
    with open(_manifest_path(path), "w") as fh:
        json.dump(ds.manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dataset(path: str | Path) -> Dataset:
    """Read a dataset written by :func:`save_dataset`."""
    path = Path(path)
    mpath = _manifest_path(path)
    if not path.exists():
        raise DatasetFormatError(f"dataset file {path} not found")
    if not mpath.exists():
        raise DatasetFormatError(f"manifest file {mpath} not found")
    with open(mpath) as fh:
        manifest = json.load(fh)
    if manifest.get("format_version") != FORMAT_VERSION:
        raise DatasetFormatError(
            f"unsupported format version {manifest.get('format_version')!r}"
        )
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    expected = _columns(manifest)
    if header != expected or (data.size and data.shape[1] != len(expected)):
        raise DatasetFormatError(
            f"column mismatch: file has {len(header)} columns, manifest expects {len(expected)}"
        )
    n_params = len(manifest["param_names"])
    n_feat = 2 * manifest["n_early"]
    return Dataset(
        model=manifest["model"],
        param_names=tuple(manifest["param_names"]),
        grid_index=data[:, 0].astype(int),
        params=data[:, 1:1 + n_params],
        features=data[:, 1 + n_params:1 + n_params + n_feat],
        targets=data[:, -1],
        manifest=manifest,
    )


def grid_of(ds: Dataset) -> SweepGrid:
    """Reconstruct the sweep grid a dataset was built on (used by scans that
    re-simulate the same parameter tuples under modified conditions)."""
    return SweepGrid(ds.model, ds.param_names, ds.params.copy(),
                     spec=ds.manifest.get("grid", {}))
