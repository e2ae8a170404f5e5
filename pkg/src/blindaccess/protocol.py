"""Two-phase secure uncoordinated access simulation.

Phase 1 (downlink): the access point beacons, each active device measures
its downlink channel, derives a key by coarse uniform quantization of the
channel gains, encrypts its message index with the expanded key, and
encodes the ciphertext into an s-sparse sign vector.

Phase 2 (uplink): all active devices transmit their coded ciphertexts in
the same slot with no pilots. The access point receives the superposition
of the per-user convolutions, jointly recovers every channel and
ciphertext by hierarchical thresholding pursuit, re-derives each key from
the recovered channel (reciprocal to the one the device measured), and
decrypts.

Uplink and downlink tap gains are complex conjugates of each other; over
the real field conjugation is the identity and the channels coincide.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from . import seeds
from .coding import (
    bits_to_int,
    cipher_bit_length,
    draw_message_and_signal,
    encode_message,
    decode_message,
    int_to_bits,
)
from .hierarchy import HierSupport, SparsityProfile, support_of
from .measurement import MeasurementOperator, ModelDims
from .signals import circular_convolve, zero_pad
from .solver import SolverConfig, hihtp, recover_factors


@dataclass(frozen=True)
class KeyQuantizer:
    """Uniform scalar quantizer for channel-gain components.

    Each selected component is clipped to [-clip, clip] and mapped to a
    ``bits``-wide cell index. Coarse cells tolerate small reciprocity
    violations: a perturbation below half a cell width cannot change the
    cell of a value planted at a cell center.
    """

    bits: int = 2
    clip: float = 3.0

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be >= 1")
        if self.clip <= 0:
            raise ValueError("clip must be > 0")

    @property
    def levels(self) -> int:
        return 1 << self.bits

    @property
    def cell_width(self) -> float:
        return 2.0 * self.clip / self.levels

    def quantize(self, x: float) -> int:
        level = int(np.floor((x + self.clip) / self.cell_width))
        return min(max(level, 0), self.levels - 1)

    def key_length(self, sigma: int, field: str) -> int:
        return sigma * self.bits * (2 if field == "complex" else 1)


@dataclass
class UserInstance:
    """One device's ground truth: channel, code vector, and bit strings."""

    user: int
    active: bool
    h: np.ndarray
    b: np.ndarray
    message_bits: np.ndarray = dataclass_field(default_factory=lambda: np.zeros(0, np.uint8))
    key_bits: np.ndarray = dataclass_field(default_factory=lambda: np.zeros(0, np.uint8))
    ciphertext_bits: np.ndarray = dataclass_field(default_factory=lambda: np.zeros(0, np.uint8))


@dataclass(frozen=True)
class ReciprocalChannelPair:
    """Uplink channel and the (possibly perturbed) conjugate downlink."""

    h_up: np.ndarray
    h_down: np.ndarray
    perturbation_level: float


def draw_channel(
    N_d: int, sigma: int, rng: np.random.Generator, field: str = "real"
) -> np.ndarray:
    """Sparse channel impulse response: sigma active taps at uniform
    positions, gains standard normal (complex: circularly symmetric,
    unit variance)."""
    if not 1 <= sigma <= N_d:
        raise ValueError(f"sigma must be in [1, {N_d}], got {sigma}")
    taps = np.sort(rng.choice(N_d, size=sigma, replace=False))
    h = np.zeros(N_d, dtype=np.float64 if field == "real" else np.complex128)
    if field == "real":
        h[taps] = rng.standard_normal(sigma)
    else:
        h[taps] = (rng.standard_normal(sigma) + 1j * rng.standard_normal(sigma)) / np.sqrt(2.0)
    return h


def reciprocal_pair(
    h_up, perturbation_level: float = 0.0, rng: np.random.Generator | None = None
) -> ReciprocalChannelPair:
    """Downlink channel as the conjugate of the uplink, plus optional
    Gaussian perturbation of the active tap gains.

    Perturbing only the active taps models imperfect gain estimation
    while keeping the measured tap set stable.
    """
    h_up = np.asarray(h_up)
    h_down = h_up.conj().copy()
    if perturbation_level > 0:
        if rng is None:
            raise ValueError("perturbation requires an rng")
        taps = np.flatnonzero(h_up)
        if np.iscomplexobj(h_up):
            noise = (
                rng.standard_normal(taps.size) + 1j * rng.standard_normal(taps.size)
            ) / np.sqrt(2.0)
        else:
            noise = rng.standard_normal(taps.size)
        h_down[taps] += perturbation_level * noise
    return ReciprocalChannelPair(h_up=h_up, h_down=h_down, perturbation_level=perturbation_level)


def derive_key(h_estimate, quantizer: KeyQuantizer, side: str) -> np.ndarray:
    """Key bits from the active taps of a channel estimate.

    The access point ("alice") conjugates its uplink estimate first, so
    under exact reciprocity both sides quantize identical values. Active
    taps are visited in ascending order; per tap the real part (and the
    imaginary part on complex channels) is quantized to ``bits`` bits,
    most significant first, and the cells are concatenated into the key.
    """
    if side not in ("alice", "bob"):
        raise ValueError(f"side must be 'alice' or 'bob', got {side!r}")
    h = np.asarray(h_estimate)
    if side == "alice":
        h = h.conj()
    complex_field = np.iscomplexobj(h)
    bits: list[np.ndarray] = []
    for tap in np.flatnonzero(h):
        components = [float(np.real(h[tap]))]
        if complex_field:
            components.append(float(np.imag(h[tap])))
        for x in components:
            bits.append(int_to_bits(quantizer.quantize(x), quantizer.bits))
    if not bits:
        return np.zeros(0, dtype=np.uint8)
    return np.concatenate(bits)


def expand_key(key_bits, length: int) -> np.ndarray:
    """Keystream of the requested length from a short key.

    Block j of the stream is the key XORed with the big-endian counter j
    (reduced to the key width), so repeated blocks differ. With
    length <= len(key) this is just the key prefix.
    """
    key = np.asarray(key_bits, dtype=np.uint8)
    if key.size == 0:
        raise ValueError("empty key")
    if length == 0:
        return np.zeros(0, dtype=np.uint8)
    width = int(key.size)
    blocks = []
    for counter in range((length + width - 1) // width):
        blocks.append(key ^ int_to_bits(counter % (1 << width), width))
    return np.concatenate(blocks)[:length]


def encrypt(message_bits, key_bits) -> np.ndarray:
    """Bitwise XOR with the expanded key; its own inverse."""
    message = np.asarray(message_bits, dtype=np.uint8)
    return message ^ expand_key(key_bits, message.size)


def decrypt(ciphertext_bits, key_bits) -> np.ndarray:
    return encrypt(ciphertext_bits, key_bits)


def synthesize_uplink(
    instances,
    op: MeasurementOperator,
    snr_db: float | None = None,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Received slot signal: the superposition of every active user's
    coded vector convolved with its channel, plus white Gaussian noise
    scaled to the requested SNR (None means noiseless)."""
    dims = op.dims
    complex_field = np.iscomplexobj(op.codebooks) or any(
        np.iscomplexobj(u.h) for u in instances
    )
    y = np.zeros(dims.N, dtype=np.complex128 if complex_field else np.float64)
    for u in instances:
        if not u.active:
            continue
        if u.h.shape != (dims.N_d,) or u.b.shape != (dims.E,):
            raise ValueError(f"user {u.user} shapes do not match {dims}")
        x = op.codebooks[u.user] @ u.b
        y += circular_convolve(x, zero_pad(u.h, dims.N), method="fft")
    if snr_db is not None:
        if rng is None:
            raise ValueError("noise requires an rng")
        signal_power = float(np.linalg.norm(y) ** 2)
        eta = np.sqrt(signal_power / (dims.N * 10.0 ** (snr_db / 10.0)))
        if complex_field:
            noise = (
                rng.standard_normal(dims.N) + 1j * rng.standard_normal(dims.N)
            ) / np.sqrt(2.0)
        else:
            noise = rng.standard_normal(dims.N)
        y = y + eta * noise
    return y


@dataclass
class PlantedInstance:
    """Ground-truth instance: operator, users, lifted vector, and data."""

    op: MeasurementOperator
    profile: SparsityProfile
    users: list[UserInstance]
    z: np.ndarray
    support: HierSupport
    y_clean: np.ndarray
    y: np.ndarray


def lift_users(users, dims: ModelDims) -> tuple[np.ndarray, HierSupport]:
    """Lifted vector and support of a set of user instances."""
    complex_field = any(np.iscomplexobj(u.h) for u in users if u.active)
    z = np.zeros(dims.lifted_dim, dtype=np.complex128 if complex_field else np.float64)
    triples = []
    for u in users:
        if not u.active:
            continue
        block = np.outer(u.b, u.h)  # E x N_d
        z[u.user * dims.N_d * dims.E : (u.user + 1) * dims.N_d * dims.E] = block.T.ravel()
        for d in np.flatnonzero(u.h):
            for e in np.flatnonzero(u.b):
                triples.append((u.user, int(d), int(e)))
    return z, HierSupport(triples)


def make_instance(
    dims: ModelDims,
    s: int,
    sigma: int,
    mu: int,
    seed: int,
    field: str = "real",
    snr_db: float | None = None,
) -> PlantedInstance:
    """Fresh planted instance: codebooks, mu active users with sparse
    channels and uniformly random messages, and the received signal.

    Every draw comes from a documented stream of the seed, so instances
    are reproducible and independent across seeds.
    """
    profile = SparsityProfile(s=s, sigma=sigma, mu=mu, dims=dims)
    op = MeasurementOperator.from_seed(dims, seed, field)
    active = set(
        np.sort(seeds.derive_rng(seed, seeds.ACTIVITY).choice(dims.N_r, mu, replace=False)).tolist()
    )
    users = []
    for p in range(dims.N_r):
        h = draw_channel(dims.N_d, sigma, seeds.derive_rng(seed, seeds.CHANNEL, p), field)
        if p in active:
            message_bits, b = draw_message_and_signal(
                dims.E, s, seeds.derive_rng(seed, seeds.MESSAGE, p)
            )
            users.append(UserInstance(user=p, active=True, h=h, b=b, message_bits=message_bits))
        else:
            users.append(UserInstance(user=p, active=False, h=h, b=np.zeros(dims.E)))
    z, support = lift_users(users, dims)
    y_clean = op.apply(z)
    if snr_db is None:
        y = y_clean
    else:
        y = synthesize_uplink(users, op, snr_db, seeds.derive_rng(seed, seeds.NOISE))
    return PlantedInstance(
        op=op, profile=profile, users=users, z=z, support=support, y_clean=y_clean, y=y
    )


@dataclass(frozen=True)
class ProtocolConfig:
    """Full configuration of one end-to-end protocol run."""

    dims: ModelDims
    s: int
    sigma: int
    mu: int
    seed: int = 0
    field: str = "real"
    snr_db: float | None = None
    perturbation: float = 0.0
    quantizer: KeyQuantizer = KeyQuantizer()
    solver: SolverConfig = SolverConfig()

    def __post_init__(self):
        if not 1 <= self.s <= self.dims.E:
            raise ValueError(f"s must be in [1, {self.dims.E}], got {self.s}")
        if not 1 <= self.sigma <= self.dims.N_d:
            raise ValueError(f"sigma must be in [1, {self.dims.N_d}], got {self.sigma}")
        if not 0 <= self.mu <= self.dims.N_r:
            raise ValueError(f"mu must be in [0, {self.dims.N_r}], got {self.mu}")
        if self.field not in ("real", "complex"):
            raise ValueError(f"field must be 'real' or 'complex', got {self.field!r}")
        if self.perturbation < 0:
            raise ValueError("perturbation must be >= 0")

    @classmethod
    def from_mapping(cls, cfg: dict) -> "ProtocolConfig":
        """Build from a JSON-compatible mapping; see README for the keys."""
        dims = ModelDims(
            N=int(cfg["N"]), N_d=int(cfg["N_d"]), E=int(cfg["E"]), N_r=int(cfg["N_r"])
        )
        quant = cfg.get("quantizer") or {}
        return cls(
            dims=dims,
            s=int(cfg["s"]),
            sigma=int(cfg["sigma"]),
            mu=int(cfg["mu"]),
            seed=int(cfg.get("seed", 0)),
            field=cfg.get("field", "real"),
            snr_db=None if cfg.get("snr_db") is None else float(cfg["snr_db"]),
            perturbation=float(cfg.get("perturbation", 0.0)),
            quantizer=KeyQuantizer(
                bits=int(quant.get("bits", 2)), clip=float(quant.get("clip", 3.0))
            ),
        )


@dataclass
class UserOutcome:
    """Per-user verdicts of a protocol run."""

    user: int
    active: bool
    recovered: bool
    support_match: bool
    key_match: bool
    decrypt_ok: bool
    bit_errors: int
    channel_rel_error: float
    key_length: int
    message_length: int


@dataclass
class ProtocolOutcome:
    """Aggregated verdicts and solver diagnostics of a protocol run.

    Decryption can only succeed for a user whose block was recovered and
    whose keys agreed, since any keystream difference flips a plaintext
    bit.
    """

    users: list[UserOutcome]
    active_count: int
    recovered_count: int
    keys_agreed: int
    decrypted: int
    all_messages_recovered: bool
    support_exact: bool
    residual_norm: float
    iterations: int
    converged_by: str

    def to_dict(self) -> dict:
        return {
            "users": [vars(u) for u in self.users],
            "aggregate": {
                "active": self.active_count,
                "recovered": self.recovered_count,
                "keys_agreed": self.keys_agreed,
                "decrypted": self.decrypted,
                "all_messages_recovered": self.all_messages_recovered,
            },
            "solver": {
                "support_exact": self.support_exact,
                "residual_norm": self.residual_norm,
                "iterations": self.iterations,
                "converged_by": self.converged_by,
            },
        }


def run_protocol(config: ProtocolConfig) -> ProtocolOutcome:
    """Execute both phases end to end against planted ground truth.

    Phase 1 draws each active user's reciprocal channel pair, derives the
    device-side key from the downlink, encrypts a uniform message, and
    encodes the ciphertext. Phase 2 synthesizes the uplink superposition,
    runs the solver, re-derives keys from the recovered channels, and
    decrypts. Message indices use the widest bit width closed under XOR,
    so ciphertexts are always encodable.
    """
    dims = config.dims
    op = MeasurementOperator.from_seed(dims, config.seed, config.field)
    quant = config.quantizer
    width = cipher_bit_length(dims.E, config.s)

    if config.mu > 0:
        active = set(
            np.sort(
                seeds.derive_rng(config.seed, seeds.ACTIVITY).choice(
                    dims.N_r, config.mu, replace=False
                )
            ).tolist()
        )
    else:
        active = set()

    users: list[UserInstance] = []
    pairs: dict[int, ReciprocalChannelPair] = {}
    messages: dict[int, np.ndarray] = {}
    bob_keys: dict[int, np.ndarray] = {}
    for p in range(dims.N_r):
        h_up = draw_channel(dims.N_d, config.sigma, seeds.derive_rng(config.seed, seeds.CHANNEL, p), config.field)
        pair = reciprocal_pair(
            h_up, config.perturbation, seeds.derive_rng(config.seed, seeds.PERTURBATION, p)
        )
        pairs[p] = pair
        if p in active:
            key_bob = derive_key(pair.h_down, quant, side="bob")
            message = int_to_bits(
                int(seeds.derive_rng(config.seed, seeds.MESSAGE, p).integers(0, 1 << width)),
                width,
            )
            cipher = encrypt(message, key_bob)
            b = encode_message(bits_to_int(cipher), dims.E, config.s)
            users.append(
                UserInstance(
                    user=p, active=True, h=h_up, b=b,
                    message_bits=message, key_bits=key_bob, ciphertext_bits=cipher,
                )
            )
            messages[p] = message
            bob_keys[p] = key_bob
        else:
            users.append(UserInstance(user=p, active=False, h=h_up, b=np.zeros(dims.E)))

    y = synthesize_uplink(users, op, config.snr_db, seeds.derive_rng(config.seed, seeds.NOISE))

    profile = SparsityProfile(s=config.s, sigma=config.sigma, mu=max(config.mu, 1), dims=dims)
    result = hihtp(op, y, profile, config.solver)
    _, true_support = lift_users(users, dims)
    # Support of the actual estimate; drops selected triples whose least
    # squares coefficient came out exactly zero (e.g. an all-silent slot).
    recovered_support = support_of(result.z_hat, dims)

    factors = {p: (b, h) for p, b, h in recover_factors(result.z_hat, dims)}
    outcomes: list[UserOutcome] = []
    keys_agreed = 0
    decrypted = 0
    recovered_count = 0
    for u in users:
        p = u.user
        recovered = p in factors
        support_match = (
            recovered_support.restricted_to([p]) == true_support.restricted_to([p])
        )
        key_match = False
        decrypt_ok = False
        bit_errors = width if u.active else 0
        channel_err = 1.0 if u.active else 0.0
        if recovered and u.active:
            b_hat, h_hat = factors[p]
            key_alice = derive_key(h_hat, quant, side="alice")
            key_match = key_alice.size == bob_keys[p].size and bool(
                np.all(key_alice == bob_keys[p])
            )
            cipher_index = decode_message(b_hat, config.s)
            if not cipher_index >> width:
                plain = decrypt(int_to_bits(cipher_index, width), key_alice)
                bit_errors = int(np.count_nonzero(plain != messages[p]))
                decrypt_ok = bit_errors == 0
            channel_err = float(
                np.linalg.norm(h_hat - u.h) / np.linalg.norm(u.h)
            )
        if u.active:
            recovered_count += recovered
            keys_agreed += key_match
            decrypted += decrypt_ok
        outcomes.append(
            UserOutcome(
                user=p,
                active=u.active,
                recovered=bool(recovered),
                support_match=bool(support_match),
                key_match=key_match,
                decrypt_ok=decrypt_ok,
                bit_errors=bit_errors,
                channel_rel_error=channel_err,
                key_length=quant.key_length(config.sigma, config.field) if u.active else 0,
                message_length=width if u.active else 0,
            )
        )

    return ProtocolOutcome(
        users=outcomes,
        active_count=len(active),
        recovered_count=recovered_count,
        keys_agreed=keys_agreed,
        decrypted=decrypted,
        all_messages_recovered=decrypted == len(active),
        support_exact=recovered_support == true_support,
        residual_norm=result.residual_norm,
        iterations=result.iterations,
        converged_by=result.converged_by,
    )
