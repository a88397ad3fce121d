"""A subshift, a cylinder and potential parameters bundled with cached derived data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .induced import return_statistics
from .potential import PotentialParams, check_params
from .sft import CylinderSpec, SftSpec, build_sft, make_cylinder
from .spectral import PerronData, perron_data, ratio_bounds


@dataclass(eq=False)
class Problem:
    spec: SftSpec
    cylinder: CylinderSpec
    params: PotentialParams
    _cache: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, alphabet_size, cylinder, A, N, transition=None, forbidden_blocks=None,
              validate=True) -> "Problem":
        spec = build_sft(alphabet_size, transition, forbidden_blocks)
        cyl = make_cylinder(spec, cylinder)
        params = PotentialParams(A, N)
        if validate:
            check_params(spec, params)
        return cls(spec, cyl, params)

    @property
    def m(self) -> int:
        return self.spec.alphabet_size

    @property
    def perron(self) -> PerronData:
        if "perron" not in self._cache:
            self._cache["perron"] = perron_data(self.spec)
        return self._cache["perron"]

    @property
    def eta(self) -> float:
        return self.perron.eta

    @property
    def xi(self) -> float:
        return math.log(self.perron.eta)

    @property
    def single_block(self) -> bool:
        return self.spec.single_forbidden_block

    def powers(self, n_max: int) -> np.ndarray:
        """core^n / eta^n for n = 0..n_max, grown on demand."""
        stack = self._cache.get("powers")
        if stack is None or stack.shape[0] <= n_max:
            scaled = self.spec.core.astype(float) / self.eta
            k = scaled.shape[0]
            size = max(n_max + 1, 2 * (0 if stack is None else stack.shape[0]))
            new = np.empty((size, k, k))
            start = 0
            if stack is None:
                new[0] = np.eye(k)
                start = 1
            else:
                new[: stack.shape[0]] = stack
                start = stack.shape[0]
            for n in range(start, size):
                new[n] = new[n - 1] @ scaled
            self._cache["powers"] = stack = new
        return stack[: n_max + 1]

    def ratio_bounds(self, n0: int):
        key = ("ratio", n0)
        if key not in self._cache:
            self._cache[key] = ratio_bounds(self.spec, n0, self.perron)
        return self._cache[key]

    def return_histogram(self, max_len: int, budget: int | None = None):
        """Distinct (length, free steps, excursion log-sum) with multiplicities."""
        key = ("hist", max_len)
        if key not in self._cache:
            lengths, free, exc = return_statistics(self.spec, self.cylinder, self.params,
                                                   max_len, budget)
            if len(lengths):
                rows = np.rec.fromarrays([lengths, free, exc], names="n,free,exc")
                uniq, counts = np.unique(rows, return_counts=True)
                hist = (uniq["n"].astype(np.int64), uniq["free"].astype(np.int64),
                        uniq["exc"].astype(float), counts.astype(float))
            else:
                hist = tuple(np.zeros(0) for _ in range(4))
            self._cache[key] = hist
        return self._cache[key]
