"""Generador pseudoaleatorio portable para particiones y sobremuestreo.

Algoritmo: bit generator PCG64 de numpy (PCG-XSL-RR 128/64) sembrado con la semilla
sin signo a través de SeedSequence. Los barajados son Fisher–Yates desde el último
índice hacia abajo con j = raw64 mod (i + 1). No se usan los métodos de alto nivel de
numpy.random.Generator porque su flujo no está garantizado entre versiones.
"""
from __future__ import annotations
from typing import List, MutableSequence, TypeVar

import numpy as np

T = TypeVar("T")


class SeededShuffler:
    def __init__(self, seed: int):
        if seed < 0 or seed >= 2**64:
            raise ValueError(f"La semilla debe ser un entero sin signo de 64 bits: {seed}")
        self._bitgen = np.random.PCG64(seed)

    def next_u64(self) -> int:
        return int(self._bitgen.random_raw())

    def below(self, bound: int) -> int:
        """Entero en [0, bound)."""
        if bound <= 0:
            raise ValueError("bound debe ser positivo")
        return self.next_u64() % bound

    def shuffle(self, items: MutableSequence[T]) -> MutableSequence[T]:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def permutation(self, n: int) -> List[int]:
        return list(self.shuffle(list(range(n))))
