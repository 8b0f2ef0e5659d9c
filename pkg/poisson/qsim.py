"""This module contains a minimal statevector simulator for the two-register
QFT pipeline.

Amplitudes are stored x-major: index = i * 2^m + j, so the x register holds
the high-order qubits and reported outcomes (k, l) read the same way.
"""
import logging
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np
from django.db import models

from .artifacts import FLOAT_FORMAT, table_to_csv
from .exceptions import InvalidValueError, NormalizationError

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-10
SEED_MASK = (1 << 64) - 1
_SQRT_HALF = np.sqrt(0.5)


class Register(models.TextChoices):
    X = 'x', 'x register (n qubits)'
    Y = 'y', 'y register (m qubits)'


class QFTImpl(models.TextChoices):
    CIRCUIT = 'circuit', 'Hadamard and controlled-phase gates'
    DENSE = 'dense', 'dense DFT matrix per register'
    FFT = 'fft', 'FFT fast path'


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Amplitudes of an (n + m)-qubit register."""

    n: int
    m: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex).ravel()
        if amplitudes.size != 1 << (self.n + self.m):
            raise InvalidValueError(
                f"expected {1 << (self.n + self.m)} amplitudes, "
                f"got {amplitudes.size}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amplitudes)

    @classmethod
    def basis(cls, n, m, index):
        """Return the computational basis state |index>."""
        amplitudes = np.zeros(1 << (n + m), dtype=complex)
        amplitudes[index] = 1
        return cls(n, m, amplitudes)

    @property
    def num_qubits(self):
        return self.n + self.m

    @property
    def shape(self):
        return 1 << self.n, 1 << self.m

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def as_matrix(self):
        """Return amplitudes as a 2^n x 2^m matrix."""
        return self.amplitudes.reshape(self.shape)


@dataclass(frozen=True)
class CountsMap:
    """Measurement histogram; outcomes that never occurred are absent."""

    counts: MappingProxyType
    shots: int

    def __post_init__(self):
        counts = dict(self.counts)
        if any(c < 1 for c in counts.values()):
            raise InvalidValueError("stored counts must be positive")
        if sum(counts.values()) != self.shots:
            raise InvalidValueError(f"counts sum to {sum(counts.values())}, "
                                    f"expected {self.shots} shots")
        object.__setattr__(self, 'counts', MappingProxyType(counts))

    def to_matrix(self, shape):
        """Return counts as an integer matrix of the given shape."""
        matrix = np.zeros(shape, dtype=np.int64)
        for (k, l), count in self.counts.items():
            matrix[k, l] = count
        return matrix


def prepare_state(source_field):
    """Amplitude-encode a normalized source field."""
    norm = float(np.linalg.norm(source_field.amplitudes))
    if not abs(norm - 1) <= NORM_TOLERANCE:
        raise NormalizationError(f"amplitude norm is {norm!r}, expected 1")
    grid = source_field.grid
    return QuantumState(grid.n, grid.m, source_field.amplitudes)


def dft_matrix(qubits, inverse=False):
    """Return the unitary DFT with kernel exp(+2 pi i k j / 2^r) / sqrt(2^r)."""
    size = 1 << qubits
    k = np.arange(size)
    sign = -1 if inverse else 1
    # reduce k*j modulo size before scaling to keep the phase argument small
    phase = np.outer(k, k) % size
    return np.exp(sign * 2j * np.pi * phase / size) / np.sqrt(size)


def qft_register_dense(state, register, inverse=False):
    """Apply the register's DFT as a dense matrix along its axis."""
    amplitudes = state.as_matrix()
    if Register(register) == Register.X:
        out = dft_matrix(state.n, inverse) @ amplitudes
    else:
        # the DFT matrix is symmetric, so A @ F applies it along y
        out = amplitudes @ dft_matrix(state.m, inverse)
    return QuantumState(state.n, state.m, out)


def qft_register_fft(state, register):
    """Apply the register's DFT through numpy's FFT."""
    axis = 0 if Register(register) == Register.X else 1
    out = np.fft.ifft(state.as_matrix(), axis=axis, norm='ortho')
    return QuantumState(state.n, state.m, out)


def _hadamard(psi, axis):
    zero = np.take(psi, 0, axis=axis)
    one = np.take(psi, 1, axis=axis)
    return np.stack(((zero + one) * _SQRT_HALF,
                     (zero - one) * _SQRT_HALF), axis=axis)


def _controlled_phase(psi, control, target, angle):
    index = [slice(None)] * psi.ndim
    index[control] = 1
    index[target] = 1
    psi[tuple(index)] *= np.exp(1j * angle)
    return psi


def qft_register_circuit(state, register):
    """Apply the register's QFT gate by gate.

    Each qubit, most significant first, gets a Hadamard followed by
    R_k = diag(1, exp(2 pi i / 2^k)) controlled by the k-1'th qubit below it;
    a swap layer then reverses the register's qubit order.
    """
    psi = state.amplitudes.reshape((2,) * state.num_qubits).copy()
    if Register(register) == Register.X:
        axes = list(range(state.n))
    else:
        axes = list(range(state.n, state.num_qubits))
    for position, target in enumerate(axes):
        psi = _hadamard(psi, target)
        for k, control in enumerate(axes[position + 1:], start=2):
            psi = _controlled_phase(psi, control, target, 2 * np.pi / 2 ** k)
    for a, b in zip(axes[:len(axes) // 2], reversed(axes)):
        psi = np.swapaxes(psi, a, b)
    return QuantumState(state.n, state.m, psi.reshape(-1))


_REGISTER_QFT = {
    QFTImpl.DENSE: qft_register_dense,
    QFTImpl.CIRCUIT: qft_register_circuit,
    QFTImpl.FFT: qft_register_fft,
}


def apply_qft_2d(state, impl=QFTImpl.CIRCUIT):
    """Apply QFT_n to the x register and then QFT_m to the y register."""
    transform = _REGISTER_QFT[QFTImpl(impl)]
    out = transform(transform(state, Register.X), Register.Y)
    logger.debug("applied %s QFT on %d qubits", QFTImpl(impl).value,
                 state.num_qubits)
    return out


def exact_probabilities(state):
    """Return P(k, l) = |amplitude_kl|^2 as a 2^n x 2^m matrix."""
    return np.abs(state.as_matrix()) ** 2


def measure_counts(state, shots, seed, batch=1 << 20):
    """Sample `shots` outcomes by inverse CDF with a seeded Philox generator.

    Draws are consumed in sample order, so a (state, shots, seed) triple
    gives the same histogram whatever the batch size.
    """
    if shots < 1:
        raise InvalidValueError(f"shots must be positive, got {shots}")
    probabilities = exact_probabilities(state).ravel()
    cdf = np.cumsum(probabilities)
    cdf /= cdf[-1]
    rng = np.random.Generator(np.random.Philox(int(seed) & SEED_MASK))
    totals = np.zeros(cdf.size, dtype=np.int64)
    remaining = shots
    while remaining:
        size = min(batch, remaining)
        outcomes = np.searchsorted(cdf, rng.random(size), side='right')
        np.minimum(outcomes, cdf.size - 1, out=outcomes)
        totals += np.bincount(outcomes, minlength=cdf.size)
        remaining -= size
    columns = 1 << state.m
    counts = {(int(index) // columns, int(index) % columns): int(totals[index])
              for index in np.flatnonzero(totals)}
    logger.debug("measured %d shots into %d outcomes", shots, len(counts))
    return CountsMap(counts, shots)


def counts_to_csv(counts):
    """Return the histogram as CSV `k,l,count` sorted by (k, l)."""
    rows = sorted(counts.counts.items())
    return table_to_csv(['k', 'l', 'count'],
                        [[k for (k, _), _ in rows],
                         [l for (_, l), _ in rows],
                         [c for _, c in rows]],
                        ['%d', '%d', '%d'])


def state_to_csv(state):
    """Return the amplitudes as CSV `index,re,im`."""
    return table_to_csv(['index', 're', 'im'],
                        [np.arange(state.amplitudes.size),
                         state.amplitudes.real, state.amplitudes.imag],
                        ['%d', FLOAT_FORMAT, FLOAT_FORMAT])
