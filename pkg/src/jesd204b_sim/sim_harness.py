"""Deterministic cycle-stepped end-to-end simulation.

One :func:`run_simulation` call wires a golden transmitter through an
impairment channel (per-lane octet skew, optional bit errors) and the
8b/10b codec into the receiver, generates SYSREF, and measures sync
time, release phase, latency and payload integrity.

Wiring per cycle: the transmitter sees the receiver's sync request from
the previous cycle (one cycle of SYNC propagation) and a multiframe
boundary derived from the shared SYSREF schedule; its emitted characters
are delayed per lane by the channel, encoded, optionally corrupted at
the bit level, decoded and handed to the receiver.  Everything is a
pure function of the configuration and seeds, so identical inputs give
byte-identical reports and event logs.

Payload correctness is judged against the transmitter's deterministic
sample generator, regenerated slice by slice, never against anything
the receiver produced.  The channel prepends ``base_idle_octets`` of
idle filler (plus the per-lane skew) so every lane sees an
idle-to-comma transition; the receiver anchors its octet rotation
there.

Long clean stretches are handed to the receiver's vectorized fast path
(``fast=True``) in bounded chunks, so memory stays flat however long
the run; the test suite asserts cycle-by-cycle equivalence with the
stepped path.  Corrupted stretches always step cycle by cycle.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from . import codec8b10b as codec
from .codec8b10b import decode_octet, encode_octet
from .config import IlasConfig, LinkConfig, ParseError, validate_config
from .rx_core import CTRL_FLAG, DERR_FLAG, NIT_FLAG, RxFsm, RxReceiver
from .tx_model import PHASE_DATA, PayloadSpec, TxLink, lane_payload_octets

OCTETS_PER_CYCLE = 4
BITS_PER_CYCLE = 40

_TAIL_CHUNK_CYCLES = 1 << 18   # vectorized-tail chunk; bounds peak memory
_TAIL_MIN_CYCLES = 64          # below this, stepping is cheaper


class SimConfigError(ValueError):
    """The simulation setup is impossible as specified.

    Raised for structural mistakes (wrong skew list length, nonpositive
    duration).  Setups that are merely doomed, like skew beyond the
    buffer capacity, are valid inputs: they must produce a reported
    fault, not an exception.
    """


@dataclass
class ChannelSpec:
    """Per-lane impairments: skew in octets plus optional bit errors.

    ``error_positions`` lists explicit ``(lane, bit_index)`` flips, with
    bit indices counted over the lane's serialized (post-skew) stream;
    bit i of cycle t is ``40 * t + i``.  A nonzero ``bit_error_rate``
    flips each line bit independently with that probability.  The two
    mechanisms are mutually exclusive.  The same seed always produces
    the same flips.
    """

    skew: tuple[int, ...] | list[int] | None = None
    bit_error_rate: float = 0.0
    error_positions: list[tuple[int, int]] | None = None
    rng_seed: int = 0
    base_idle_octets: int = 32
    idle_octet: int = 0x00

    def __post_init__(self) -> None:
        if self.bit_error_rate and self.error_positions:
            raise ValueError("bit_error_rate and error_positions are mutually exclusive")
        if self.bit_error_rate < 0 or self.bit_error_rate > 1:
            raise ValueError("bit_error_rate must be in [0, 1]")
        if self.base_idle_octets < 24:
            # The idle prefix must outlast receiver startup (reset plus the
            # PHY-ready gate, 6 cycles) or the lane cannot observe the
            # idle-to-comma transition its octet rotation anchors on.
            raise ValueError("base_idle_octets must be at least 24")
        if self.skew is not None and any(s < 0 for s in self.skew):
            raise ValueError("skew must be non-negative")

    def lane_skews(self, lanes: int) -> list[int]:
        if self.skew is None:
            return [0] * lanes
        if len(self.skew) != lanes:
            raise SimConfigError(
                f"need {lanes} skew entries, got {len(self.skew)}")
        return [int(s) for s in self.skew]

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        if d["skew"] is not None:
            d["skew"] = list(d["skew"])
        if d["error_positions"] is not None:
            d["error_positions"] = [list(p) for p in d["error_positions"]]
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ChannelSpec":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParseError(f"unknown channel key(s): {', '.join(unknown)}")
        if "error_positions" in data and data["error_positions"] is not None:
            data = dict(data)
            data["error_positions"] = [tuple(p) for p in data["error_positions"]]
        return cls(**data)


@dataclass
class SysrefSpec:
    """SYSREF pulse schedule shared by both link ends.

    Pulses start at ``first_cycle`` and repeat every
    ``period_multiframes`` multiframes (``None`` = one-shot;
    ``first_cycle=None`` = never, the receiver then holds in CGS).
    ``tx_phase_offset_octets`` shifts the transmitter's multiframe grid
    against SYSREF; nonzero values are the negative control for the
    deterministic-latency property.
    """

    first_cycle: int | None = 8
    period_multiframes: int | None = 4
    tx_phase_offset_octets: int = 0

    def __post_init__(self) -> None:
        if self.period_multiframes is not None and self.period_multiframes < 1:
            raise ValueError("period_multiframes must be >= 1 or None")
        if self.tx_phase_offset_octets % OCTETS_PER_CYCLE:
            raise ValueError("tx_phase_offset_octets must be a multiple of 4")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SysrefSpec":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ParseError(f"unknown sysref key(s): {', '.join(unknown)}")
        return cls(**data)

    def configure(self, fk: int) -> None:
        if self.period_multiframes is not None:
            self._period_cycles = self.period_multiframes * fk // OCTETS_PER_CYCLE

    def pulse(self, cycle: int) -> bool:
        if self.first_cycle is None or cycle < self.first_cycle:
            return False
        if cycle == self.first_cycle:
            return True
        if self.period_multiframes is None:
            return False
        return (cycle - self.first_cycle) % self._period_cycles == 0


@dataclass
class SimReport:
    """Measured results of one simulation run."""

    config: dict
    payload: dict
    channel: dict
    sysref: dict
    duration_cycles: int
    fast_path_used: bool
    sync_achieved: bool
    resync_count: int
    # cycle-number measurement points (-1 = never reached)
    t_sync_deassert: int
    t_synced: int
    t_release: int
    t_first_valid: int
    tx_data_start_cycle: int
    release_lmfc_phase: int
    # sync time in frame clocks from three references
    sync_frames_from_sync_deassert: float
    sync_frames_from_phy_ready: float
    sync_frames_from_reset: float
    total_latency_octets: int
    startup_latency_cycles: int
    payload_match: bool
    payload_octets_compared: int
    payload_mismatch_octets: int
    error_counts: dict
    flips_injected: int
    flips_pre_release: int
    event_log: list[str]

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, indent=2)


def apply_skew(lane_streams: list[np.ndarray], skews: list[int],
               idle_octet: int = 0x00) -> list[np.ndarray]:
    """Delay each lane's octet stream by prepending idle filler octets."""
    out = []
    for stream, skew in zip(lane_streams, skews):
        if skew < 0:
            raise ValueError("skew must be non-negative")
        filler = np.full(skew, idle_octet, dtype=np.uint8)
        out.append(np.concatenate([filler, np.asarray(stream, dtype=np.uint8)]))
    return out


def apply_bit_errors(bits: np.ndarray, rate: float = 0.0,
                     positions: list[int] | None = None,
                     seed: int = 0) -> tuple[np.ndarray, list[int]]:
    """Flip bits in a serialized stream; returns (impaired, flip list).

    Either explicit positions (out-of-range entries ignored) or an
    independent per-bit flip probability with a fixed seed.
    """
    bits = np.asarray(bits, dtype=np.uint8).copy()
    if positions is not None and rate:
        raise ValueError("rate and positions are mutually exclusive")
    if positions is not None:
        flips = sorted(p for p in positions if 0 <= p < bits.shape[0])
    elif rate > 0:
        rng = np.random.default_rng(seed)
        flips = np.flatnonzero(rng.random(bits.shape[0]) < rate).tolist()
    else:
        flips = []
    for p in flips:
        bits[p] ^= 1
    return bits, [int(p) for p in flips]


class _LaneCodec:
    """Per-lane encode/decode disparity state for the stepped pipeline."""

    __slots__ = ("enc_rd", "dec_rd")

    def __init__(self) -> None:
        self.enc_rd = codec.RD_NEG
        self.dec_rd = codec.RD_NEG


class _SegmentCheck:
    """Incremental comparison of one output segment against the generator."""

    def __init__(self, payload: PayloadSpec, lanes: int, m0: int, store: bool):
        self.payload = payload
        self.lanes = lanes
        self.m0 = m0
        self.off = [0] * lanes
        self.compared = 0
        self.mismatched = 0
        self.store = store
        self.stored: list[list[np.ndarray]] = [[] for _ in range(lanes)]

    def absorb(self, lane: int, got: np.ndarray) -> None:
        if got.shape[0] == 0:
            return
        exp = lane_payload_octets(self.payload, self.lanes, lane,
                                  self.m0 + self.off[lane], got.shape[0])
        self.off[lane] += got.shape[0]
        self.compared += got.shape[0]
        self.mismatched += int(np.count_nonzero(got != exp))
        if self.store:
            self.stored[lane].append(got)

    def arrays(self) -> list[np.ndarray]:
        return [np.concatenate(chunks) if chunks else np.zeros(0, np.uint8)
                for chunks in self.stored]


class Simulation:
    """One link end-to-end; create, then :meth:`run`.

    After a run, ``output_segments`` holds the released output octets per
    segment and lane (populated when ``collect_output`` is set), and
    ``received_symbols`` the post-impairment line symbols per lane (when
    ``collect_received`` is set).
    """

    def __init__(self, cfg: LinkConfig, ilas: IlasConfig | None = None,
                 payload: PayloadSpec | None = None,
                 channel: ChannelSpec | None = None,
                 sysref: SysrefSpec | None = None,
                 collect_output: bool = False,
                 collect_received: bool = False):
        validate_config(cfg)
        self.cfg = cfg
        self.payload = payload or PayloadSpec()
        self.channel = channel or ChannelSpec()
        self.sysref = sysref or SysrefSpec()
        self.sysref.configure(cfg.fk)
        self.tx = TxLink(cfg, ilas, self.payload)
        self.rx = RxReceiver(cfg, expected_ilas=self.tx.ilas_base)
        self.skews = self.channel.lane_skews(cfg.L)
        self.fills = [self.channel.base_idle_octets + s for s in self.skews]
        self.collect_output = collect_output
        self.collect_received = collect_received

        self._bit_mode = (self.channel.bit_error_rate > 0
                          or bool(self.channel.error_positions))
        self._flips_by_cycle: dict[int, list[tuple[int, int]]] = {}
        self._max_flip_cycle = -1
        if self.channel.error_positions:
            for lane, bit in self.channel.error_positions:
                cyc, off = divmod(int(bit), BITS_PER_CYCLE)
                self._flips_by_cycle.setdefault(cyc, []).append((int(lane), off))
                self._max_flip_cycle = max(self._max_flip_cycle, cyc)
        self._err_rngs = [np.random.default_rng((self.channel.rng_seed, lane))
                          for lane in range(cfg.L)]

    def _received_char(self, lane: int, index: int) -> tuple[int, bool]:
        fill = self.fills[lane]
        if index < fill:
            return self.channel.idle_octet, False
        off = index - fill
        return self._tx_oct[lane][off], self._tx_ctrl[lane][off]

    # -- main loop ------------------------------------------------------------

    def run(self, duration: int, fast: bool = True) -> SimReport:
        if duration < 1:
            raise SimConfigError(f"duration must be positive, got {duration}")
        cfg = self.cfg
        rx, tx = self.rx, self.tx
        lanes = cfg.L
        mf_cycles = cfg.fk // OCTETS_PER_CYCLE
        s0 = self.sysref.first_cycle
        tx_off_cycles = self.sysref.tx_phase_offset_octets // OCTETS_PER_CYCLE

        self._tx_oct: list[list[int]] = [[] for _ in range(lanes)]
        self._tx_ctrl: list[list[bool]] = [[] for _ in range(lanes)]
        lane_codecs = [_LaneCodec() for _ in range(lanes)]
        sync_seen = True
        flips_injected = 0
        flips_pre_release = 0
        segments: list[_SegmentCheck] = []
        seg_data_cycle: list[int] = []
        step_buf: list[list[int]] | None = None
        recv_syms: list[list[int]] = [[] for _ in range(lanes)]
        self._recv_tail: list[list[np.ndarray]] = [[] for _ in range(lanes)]
        fast_used = False
        cur_data_cycle = -1

        def close_step_buf() -> None:
            nonlocal step_buf
            if step_buf is not None:
                seg = segments[-1]
                for lane in range(lanes):
                    seg.absorb(lane, np.array(step_buf[lane], dtype=np.uint8))
            step_buf = None

        t = 0
        while t < duration:
            pulse = self.sysref.pulse(t)
            if s0 is None or t < s0:
                tx_boundary = False
            else:
                tx_boundary = ((t - s0 - tx_off_cycles) % mf_cycles) == 0

            sent_before = tx.lane_octets_sent
            words = tx.step(sync_seen, tx_boundary)
            for lane, (octs, mask) in enumerate(words):
                self._tx_oct[lane].extend(octs)
                self._tx_ctrl[lane].extend(
                    ((mask >> i) & 1 == 1 for i in range(OCTETS_PER_CYCLE)))
            if tx.lane_octets_sent > sent_before:
                if cur_data_cycle < 0:
                    cur_data_cycle = t
            elif tx.phase != PHASE_DATA:
                cur_data_cycle = -1

            cycle_flips = self._flips_by_cycle.get(t, ()) if self._bit_mode else ()
            rx_words = []
            for lane in range(lanes):
                base = OCTETS_PER_CYCLE * t
                lc = lane_codecs[lane]
                syms = []
                for k in range(OCTETS_PER_CYCLE):
                    octet, ctrl = self._received_char(lane, base + k)
                    sym, lc.enc_rd = encode_octet(octet, ctrl, lc.enc_rd)
                    syms.append(sym)
                if self._bit_mode:
                    if self.channel.bit_error_rate > 0:
                        u = self._err_rngs[lane].random(BITS_PER_CYCLE)
                        offs = np.flatnonzero(u < self.channel.bit_error_rate)
                    else:
                        offs = [o for (ln, o) in cycle_flips if ln == lane]
                    for o in offs:
                        o = int(o)
                        syms[o // 10] ^= 1 << (9 - o % 10)
                        flips_injected += 1
                        if not rx.released:
                            flips_pre_release += 1
                if self.collect_received:
                    recv_syms[lane].extend(syms)
                word = []
                for sym in syms:
                    octet, ctrl, nit, derr, lc.dec_rd = decode_octet(sym, lc.dec_rd)
                    word.append(octet | (CTRL_FLAG if ctrl else 0)
                                | (NIT_FLAG if nit else 0)
                                | (DERR_FLAG if derr else 0))
                rx_words.append(tuple(word))

            released_before = rx.released
            out = rx.step_packed(rx_words, pulse, True)
            if rx.released and not released_before:
                segments.append(_SegmentCheck(self.payload, lanes,
                                              tx.data_segments[-1],
                                              self.collect_output))
                seg_data_cycle.append(cur_data_cycle)
                step_buf = [[] for _ in range(lanes)]
            elif released_before and not rx.released:
                close_step_buf()
            if out.valid:
                for lane in range(lanes):
                    step_buf[lane].extend(out.words[lane])
            sync_seen = rx.sync_request
            t += 1

            flips_done = (not self._bit_mode
                          or (self.channel.bit_error_rate == 0
                              and t > self._max_flip_cycle))
            if (fast and flips_done and rx.released
                    and rx.fsm is RxFsm.SYNCED and tx.phase == PHASE_DATA
                    and t >= rx.t_release + 8
                    and duration - t >= _TAIL_MIN_CYCLES):
                close_step_buf()
                self._tail_begin(t)
                seg = segments[-1]
                done = True
                while t < duration:
                    n = min(_TAIL_CHUNK_CYCLES, duration - t)
                    outs = self._tail_chunk(t, n, lane_codecs)
                    if outs is None:
                        done = False
                        break
                    fast_used = True
                    for lane in range(lanes):
                        seg.absorb(lane, outs[lane])
                    t += n
                if done:
                    break
                step_buf = [[] for _ in range(lanes)]

        if step_buf is not None:
            close_step_buf()
        return self._build_report(duration, fast_used, segments, seg_data_cycle,
                                  flips_injected, flips_pre_release, recv_syms)

    # -- vectorized tail -------------------------------------------------------

    def _tail_begin(self, t0: int) -> None:
        """Freeze the stepped TX history into rolling per-lane arrays."""
        self._tx_base = 0
        self._tx_tail_oct = [np.array(o, dtype=np.uint8) for o in self._tx_oct]
        self._tx_tail_ctrl = [np.array(c, dtype=bool) for c in self._tx_ctrl]

    def _tail_chunk(self, t0: int, n_cycles: int,
                    lane_codecs: list[_LaneCodec]) -> list[np.ndarray] | None:
        """One vectorized chunk over cycles [t0, t0 + n_cycles)."""
        cfg = self.cfg
        tx = self.tx
        need = n_cycles * OCTETS_PER_CYCLE
        tx_snapshot = (tx.lane_octets_sent, list(tx.scr_states))
        rd_snapshot = [(lc.enc_rd, lc.dec_rd) for lc in lane_codecs]
        bulk = tx.bulk_data(n_cycles)
        lane_oct, lane_ctrl, lane_bad, tail_syms = [], [], [], []
        for lane in range(cfg.L):
            self._tx_tail_oct[lane] = np.concatenate(
                [self._tx_tail_oct[lane], bulk[lane]])
            self._tx_tail_ctrl[lane] = np.concatenate(
                [self._tx_tail_ctrl[lane], np.zeros(bulk[lane].shape[0], bool)])
            start = OCTETS_PER_CYCLE * t0 - self.fills[lane] - self._tx_base
            window_o = self._tx_tail_oct[lane][start: start + need]
            window_c = self._tx_tail_ctrl[lane][start: start + need]
            syms, lane_codecs[lane].enc_rd = codec.encode_stream(
                window_o, window_c, lane_codecs[lane].enc_rd)
            octs, ctrl, nit, derr, lane_codecs[lane].dec_rd = codec.decode_stream(
                syms, lane_codecs[lane].dec_rd)
            lane_oct.append(octs)
            lane_ctrl.append(ctrl)
            lane_bad.append(nit | derr)
            tail_syms.append(syms)
        try:
            outs = self.rx.fast_forward(lane_oct, lane_ctrl, lane_bad, n_cycles)
        except ValueError:
            tx.lane_octets_sent, tx.scr_states = tx_snapshot[0], tx_snapshot[1]
            for lc, (er, dr) in zip(lane_codecs, rd_snapshot):
                lc.enc_rd, lc.dec_rd = er, dr
            for lane in range(cfg.L):
                self._tx_tail_oct[lane] = self._tx_tail_oct[lane][:-bulk[lane].shape[0]]
                self._tx_tail_ctrl[lane] = self._tx_tail_ctrl[lane][:-bulk[lane].shape[0]]
            return None
        if self.collect_received:
            for lane in range(cfg.L):
                self._recv_tail[lane].append(tail_syms[lane])
        # trim TX history that no later chunk can reach
        keep_from = (OCTETS_PER_CYCLE * (t0 + n_cycles)
                     - max(self.fills) - 16 - self._tx_base)
        if keep_from > 0:
            for lane in range(cfg.L):
                self._tx_tail_oct[lane] = self._tx_tail_oct[lane][keep_from:]
                self._tx_tail_ctrl[lane] = self._tx_tail_ctrl[lane][keep_from:]
            self._tx_base += keep_from
        return outs

    # -- reporting -------------------------------------------------------------

    def _build_report(self, duration: int, fast_used: bool,
                      segments: list[_SegmentCheck], seg_data_cycle: list[int],
                      flips_injected: int, flips_pre_release: int,
                      recv_syms: list[list[int]]) -> SimReport:
        cfg = self.cfg
        rx = self.rx

        compared = sum(s.compared for s in segments)
        mismatched = sum(s.mismatched for s in segments)
        payload_match = compared > 0 and mismatched == 0
        self.output_segments = ([s.arrays() for s in segments]
                                if self.collect_output else [])
        self.segment_tx_starts = [s.m0 for s in segments]

        if self.collect_received:
            self.received_symbols = []
            for lane in range(cfg.L):
                parts = [np.array(recv_syms[lane], dtype=np.uint16)]
                parts.extend(self._recv_tail[lane])
                self.received_symbols.append(np.concatenate(parts))

        sync_achieved = rx.t_synced >= 0
        frames_per_cycle = OCTETS_PER_CYCLE / cfg.F

        def frames(a: int, b: int) -> float:
            if a < 0 or b < 0:
                return -1.0
            return round((a - b) * frames_per_cycle, 3)

        t_data = seg_data_cycle[0] if seg_data_cycle else -1
        latency_oct = (OCTETS_PER_CYCLE * (rx.t_release - t_data)
                       if rx.t_release >= 0 and t_data >= 0 else -1)

        events = [f"cycle={c} lane={'-' if l is None else l} event={n} detail={d or '-'}"
                  for (c, l, n, d) in rx.events]

        return SimReport(
            config=cfg.to_dict(),
            payload=self.payload.to_dict(),
            channel=self.channel.to_dict(),
            sysref=self.sysref.to_dict(),
            duration_cycles=duration,
            fast_path_used=fast_used,
            sync_achieved=sync_achieved,
            resync_count=rx.resync_count,
            t_sync_deassert=rx.t_sync_deassert,
            t_synced=rx.t_synced,
            t_release=rx.t_release,
            t_first_valid=rx.t_first_valid,
            tx_data_start_cycle=t_data,
            release_lmfc_phase=rx.release_lmfc_phase,
            sync_frames_from_sync_deassert=frames(rx.t_synced, rx.t_sync_deassert),
            sync_frames_from_phy_ready=frames(rx.t_synced, rx.t_cgs_enter),
            sync_frames_from_reset=frames(rx.t_synced, 0),
            total_latency_octets=latency_oct,
            startup_latency_cycles=(latency_oct // OCTETS_PER_CYCLE
                                    if latency_oct >= 0 else -1),
            payload_match=payload_match,
            payload_octets_compared=compared,
            payload_mismatch_octets=mismatched,
            error_counts=dict(rx.error_counts),
            flips_injected=flips_injected,
            flips_pre_release=flips_pre_release,
            event_log=events,
        )


def run_simulation(cfg: LinkConfig, ilas: IlasConfig | None = None,
                   payload: PayloadSpec | None = None,
                   channel: ChannelSpec | None = None,
                   sysref: SysrefSpec | None = None,
                   duration: int = 4096, fast: bool = True,
                   collect_output: bool = False,
                   collect_received: bool = False) -> SimReport:
    """Run one link end to end and return the measurement report."""
    sim = Simulation(cfg, ilas, payload, channel, sysref,
                     collect_output=collect_output,
                     collect_received=collect_received)
    return sim.run(duration, fast=fast)


def run_multi_link(cfg: LinkConfig, **kwargs) -> list[SimReport]:
    """Run ``cfg.links`` independent links sharing one SYSREF schedule.

    Links do not interact beyond the common SYSREF phase; per-link
    channel seeds are offset by the link index.
    """
    reports = []
    channel = kwargs.pop("channel", None) or ChannelSpec()
    for link in range(cfg.links):
        ch = dataclasses.replace(channel, rng_seed=channel.rng_seed + link)
        reports.append(run_simulation(cfg, channel=ch, **kwargs))
    return reports


@dataclass
class LatencySweep:
    """Outcome of a deterministic-latency trial sweep."""

    latencies: list[int]
    release_phases: list[int]
    all_synced: bool
    deterministic: bool


def measure_latency_determinism(cfg: LinkConfig, n_trials: int,
                                skew_range: tuple[int, int] | None = None,
                                seed: int = 0,
                                payload: PayloadSpec | None = None,
                                sysref: SysrefSpec | None = None,
                                duration: int | None = None) -> LatencySweep:
    """Run ``n_trials`` with random per-lane skews and compare latencies.

    The SYSREF phase relative to the transmitter grid is held fixed
    across trials; the verdict is pass iff every trial produced the same
    total latency.  Varying the phase instead (via ``sysref``) is the
    negative control and is expected to break the equality.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    validate_config(cfg)
    if skew_range is None:
        skew_range = (0, cfg.fk // 2)
    rng = np.random.default_rng(seed)
    base_sysref = sysref or SysrefSpec()
    if duration is None:
        s0 = base_sysref.first_cycle or 0
        duration = s0 + (48 + skew_range[1] + 10 * cfg.fk) // OCTETS_PER_CYCLE + 128
    latencies = []
    phases = []
    synced = True
    for _ in range(n_trials):
        skews = rng.integers(skew_range[0], skew_range[1] + 1, cfg.L)
        channel = ChannelSpec(skew=[int(s) for s in skews])
        rep = run_simulation(cfg, payload=payload, channel=channel,
                             sysref=dataclasses.replace(base_sysref),
                             duration=duration)
        synced = synced and rep.sync_achieved and rep.t_release >= 0
        latencies.append(rep.total_latency_octets)
        phases.append(rep.release_lmfc_phase)
    deterministic = synced and len(set(latencies)) == 1
    return LatencySweep(latencies, phases, synced, deterministic)
