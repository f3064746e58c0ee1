"""Wind scenario handling: CSV ingest, train/test split, derived scenarios.

The CSV layout is one header row ``t,s1,s2,...`` followed by one row per
time step with per-unit output factors in [0, 1]. A scenario is a single
profile shared by every wind farm and scaled by farm capacity (full
spatial correlation). Per-farm profiles are supported through column
names of the form ``s1/farmA``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .network import DataError, ElectricNetwork

__all__ = ["ScenarioSet", "load_scenarios", "extrema", "iteration_order"]


@dataclass(frozen=True)
class ScenarioSet:
    """Per-unit wind profiles with a train/test partition.

    ``profiles`` has shape (T, n_scenarios) in shared mode and
    (T, n_scenarios, n_farms) in per-farm mode. Training scenarios come
    first in file order; indices below refer to positions in the file.
    """

    profiles: np.ndarray
    train: np.ndarray         # indices into profiles
    test: np.ndarray
    seed: int
    farm_ids: tuple[str, ...] | None = None

    @property
    def horizon(self) -> int:
        return self.profiles.shape[0]

    @property
    def n_scenarios(self) -> int:
        return self.profiles.shape[1]

    def profile(self, k: int) -> np.ndarray:
        """Profile of scenario ``k``: (T,) shared or (T, n_farms)."""
        return self.profiles[:, k]

    @property
    def expectation(self) -> np.ndarray:
        """Per-time arithmetic mean of the training profiles."""
        return self.profiles[:, self.train].mean(axis=1)

    def farm_output(self, net: ElectricNetwork, profile: np.ndarray) -> np.ndarray:
        """Wind farm output W[j, t] in MW for one profile."""
        caps = np.array([w.capacity for w in net.wind_farms])
        if profile.ndim == 1:
            return caps[:, None] * profile[None, :]
        if self.farm_ids is None or len(self.farm_ids) != len(net.wind_farms):
            raise DataError("per-farm scenario set does not match the farm list")
        order = [self.farm_ids.index(w.id) for w in net.wind_farms]
        return caps[:, None] * profile[:, order].T


def load_scenarios(path, split_ratio: float, seed: int = 0) -> ScenarioSet:
    """Read a scenario CSV and split it by file order.

    The first floor(split_ratio * n) scenarios form the training set.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows) < 2:
        raise DataError(f"{path}: no scenario rows")
    header = [h.strip() for h in rows[0]]
    if header[0] != "t":
        raise DataError(f"{path}: first column must be 't', got {header[0]!r}")
    names = header[1:]
    width = len(header)
    table = []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise DataError(f"{path}: row {r} has {len(row)} fields, expected {width}")
        table.append([float(v) for v in row[1:]])
    values = np.asarray(table)
    if values.size and (values.min() < 0.0 or values.max() > 1.0):
        raise DataError(f"{path}: profile values outside [0, 1]")

    farm_ids: tuple[str, ...] | None = None
    if any("/" in n for n in names):
        scen, farms = [], []
        for n in names:
            s, f = n.split("/", 1)
            if s not in scen:
                scen.append(s)
            if f not in farms:
                farms.append(f)
        profiles = np.empty((values.shape[0], len(scen), len(farms)))
        for c, n in enumerate(names):
            s, f = n.split("/", 1)
            profiles[:, scen.index(s), farms.index(f)] = values[:, c]
        farm_ids = tuple(farms)
    else:
        profiles = values

    n = profiles.shape[1]
    n_train = int(np.floor(split_ratio * n))
    if n_train < 1:
        raise DataError(f"{path}: split ratio {split_ratio} leaves no "
                        f"training scenarios out of {n}")
    idx = np.arange(n)
    return ScenarioSet(profiles=profiles, train=idx[:n_train],
                       test=idx[n_train:], seed=seed, farm_ids=farm_ids)


def _totals(s: ScenarioSet) -> np.ndarray:
    prof = s.profiles[:, s.train]
    axes = tuple(i for i in range(prof.ndim) if i != 1)
    return prof.sum(axis=axes)


def extrema(s: ScenarioSet) -> tuple[int, int]:
    """Training scenarios with the most and least total wind energy.

    Ties break to the lowest scenario index. Returns file-order indices.
    """
    if len(s.train) == 0:
        raise DataError("empty training set")
    totals = _totals(s)
    return int(s.train[int(np.argmax(totals))]), int(s.train[int(np.argmin(totals))])


def iteration_order(s: ScenarioSet, num_iterations: int,
                    seed: int | None = None) -> np.ndarray:
    """Scenario index for each iteration: concatenated shuffled epochs.

    Each epoch is an independent permutation of the training indices;
    the sequence is deterministic for a given seed.
    """
    if len(s.train) == 0:
        raise DataError("empty training set")
    rng = np.random.default_rng(s.seed if seed is None else seed)
    chunks = []
    total = 0
    while total < num_iterations:
        chunks.append(rng.permutation(s.train))
        total += len(s.train)
    return np.concatenate(chunks)[:num_iterations]
