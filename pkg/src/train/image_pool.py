from typing import Optional

import numpy as np


class ImagePool:
    """
    History of generated images shown to a discriminator.

    Until the pool is full every fake is stored and returned as is. Afterwards
    each fake is, with probability 1/2, swapped for a random stored image (which
    it replaces); otherwise it is returned unchanged. Capacity 0 disables the pool.
    """

    def __init__(self, capacity: int, images: Optional[np.ndarray] = None):
        self.capacity = capacity
        self.images = [] if images is None else [np.array(img) for img in images]
        if len(self.images) > capacity:
            raise ValueError(f"pool holds {len(self.images)} images, capacity {capacity}")

    def __len__(self) -> int:
        return len(self.images)

    def query(self, fakes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if self.capacity == 0:
            return np.array(fakes)
        out = []
        for image in fakes:
            if len(self.images) < self.capacity:
                self.images.append(np.array(image))
                out.append(np.array(image))
            elif rng.random() < 0.5:
                index = int(rng.integers(0, self.capacity))
                out.append(self.images[index])
                self.images[index] = np.array(image)
            else:
                out.append(np.array(image))
        return np.stack(out)

    def as_array(self, like: np.ndarray) -> np.ndarray:
        """Stored images as one [n,C,H,W] array (n may be 0)."""
        if not self.images:
            return np.zeros((0,) + tuple(like.shape[1:]), dtype=like.dtype)
        return np.stack(self.images).astype(like.dtype)
