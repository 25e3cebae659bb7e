"""Fixed-capacity FIFO experience store with uniform minibatch sampling."""

from __future__ import annotations

import numpy as np


class ReplayBuffer:
    """Ring buffer over named columns; oldest rows are overwritten first.

    fields maps column name -> width (0 for scalars). Sampling is uniform
    without replacement within one minibatch.
    """

    def __init__(self, capacity: int, fields: dict[str, int]):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.fields = dict(fields)
        self.data = {
            name: np.zeros((capacity, width) if width else capacity)
            for name, width in fields.items()
        }
        self.size = 0
        self.cursor = 0

    def __len__(self) -> int:
        return self.size

    def push(self, **row) -> None:
        if set(row) != set(self.fields):
            raise ValueError(f"row columns {sorted(row)} != {sorted(self.fields)}")
        i = self.cursor
        for name, value in row.items():
            self.data[name][i] = value
        self.cursor = (self.cursor + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
        if batch_size > self.size:
            raise ValueError(f"batch {batch_size} exceeds stored {self.size}")
        idx = rng.choice(self.size, size=batch_size, replace=False)
        return {name: arr[idx] for name, arr in self.data.items()}

    def rows_in_order(self) -> dict[str, np.ndarray]:
        """Stored rows from oldest to newest (for inspection and tests)."""
        if self.size < self.capacity:
            order = np.arange(self.size)
        else:
            order = np.concatenate([np.arange(self.cursor, self.capacity),
                                    np.arange(self.cursor)])
        return {name: arr[order] for name, arr in self.data.items()}

    # -- persistence ---------------------------------------------------------

    def state_arrays(self, prefix: str) -> dict[str, np.ndarray]:
        return {f"{prefix}.{name}": arr[:self.size].copy()
                for name, arr in self.data.items()}

    def state_meta(self) -> dict:
        return {"size": self.size, "cursor": self.cursor, "capacity": self.capacity}

    def load_state(self, meta: dict, arrays: dict[str, np.ndarray], prefix: str) -> None:
        if meta["capacity"] != self.capacity:
            raise ValueError("buffer capacity mismatch")
        self.size = int(meta["size"])
        self.cursor = int(meta["cursor"])
        for name, arr in self.data.items():
            arr[:] = 0.0
            arr[:self.size] = arrays[f"{prefix}.{name}"]
