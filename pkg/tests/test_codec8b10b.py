"""8b/10b coding: published values, round trips, disparity, commas."""

import numpy as np
import pytest

from jesd204b_sim import codec8b10b as codec
from jesd204b_sim.codec8b10b import (CONTROL_OCTETS, RD_NEG, RD_POS, Char,
                                     InvalidControlCode, NoCommaFound,
                                     bit_align, decode_stream, decode_symbol,
                                     encode_char, encode_stream, serialize)

K_CODES = sorted(CONTROL_OCTETS.values())


def disparity_oracle(sym: int) -> int:
    """Independent per-symbol imbalance: ones minus zeros over 10 bits."""
    ones = bin(sym & 0x3FF).count("1")
    return 2 * ones - 10


class TestPublishedValues:
    """Spot checks against the published 8b/10b code table."""

    @pytest.mark.parametrize("octet,ctrl,rd,expected", [
        (0xBC, True, RD_NEG, 0b0011111010),   # K28.5
        (0xBC, True, RD_POS, 0b1100000101),
        (0x1C, True, RD_NEG, 0b0011110100),   # K28.0
        (0x1C, True, RD_POS, 0b1100001011),
        (0x7C, True, RD_NEG, 0b0011110011),   # K28.3
        (0x9C, True, RD_NEG, 0b0011110010),   # K28.4
        (0xFC, True, RD_NEG, 0b0011111000),   # K28.7
        (0x00, False, RD_NEG, 0b1001110100),  # D0.0
        (0x00, False, RD_POS, 0b0110001011),
    ])
    def test_encode(self, octet, ctrl, rd, expected):
        sym, _ = encode_char(Char(octet, ctrl), rd)
        assert sym == expected

    def test_k28_5_decodes_as_control(self):
        ch, rd = decode_symbol(0b0011111010, RD_NEG)
        assert ch == Char(0xBC, is_control=True)
        assert rd == RD_POS


class TestRoundTrip:
    def test_exhaustive_all_codes_both_disparities(self):
        for rd in (RD_NEG, RD_POS):
            for octet in range(256):
                sym, rd_out = encode_char(Char(octet), rd)
                ch, rd_dec = decode_symbol(sym, rd)
                assert ch == Char(octet)
                assert rd_dec == rd_out
            for octet in K_CODES:
                sym, rd_out = encode_char(Char(octet, True), rd)
                ch, rd_dec = decode_symbol(sym, rd)
                assert ch == Char(octet, is_control=True)
                assert rd_dec == rd_out

    def test_rd_evolution_matches_symbol_imbalance(self):
        # The encoder's next disparity must equal what the symbol's own
        # bit imbalance dictates: +2 forces positive, -2 negative,
        # balanced keeps the previous value.
        for rd in (RD_NEG, RD_POS):
            for octet in list(range(256)) + K_CODES:
                for is_ctrl in ({False, True} if octet in K_CODES else {False}):
                    sym, rd_out = encode_char(Char(octet, is_ctrl), rd)
                    d = disparity_oracle(sym)
                    assert d in (-2, 0, 2)
                    expected = rd if d == 0 else (RD_POS if d > 0 else RD_NEG)
                    assert rd_out == expected

    def test_invalid_control_codes_rejected(self):
        for octet in (0xF7, 0xFB, 0xFD, 0xFE, 0x00, 0x3C, 0x5C, 0xDC):
            with pytest.raises(InvalidControlCode):
                encode_char(Char(octet, is_control=True), RD_NEG)


class TestDisparityBound:
    def test_random_stream_keeps_running_disparity_bounded(self):
        # Brute-force accumulator oracle over the serialized bits.
        rng = np.random.default_rng(0)
        rd = RD_NEG
        running = -1
        for octet in rng.integers(0, 256, 1000):
            sym, rd = encode_char(Char(int(octet)), rd)
            running += disparity_oracle(sym)
            assert running in (-1, +1)
            assert (running > 0) == (rd == RD_POS)

    def test_dc_balance_over_encoded_sequence(self):
        rng = np.random.default_rng(1)
        octets = rng.integers(0, 256, 4000).astype(np.uint8)
        syms, _ = encode_stream(octets, np.zeros(4000, bool), RD_NEG)
        bits = serialize(syms).astype(np.int64)
        excess = np.cumsum(2 * bits - 1)
        boundary = excess[9::10]
        assert np.abs(boundary).max() <= 2


class TestErrorFlags:
    def test_all_zero_symbol_not_in_table(self):
        # Independent argument: every valid symbol is DC-constrained to
        # 4..6 ones, so the all-zeros pattern can never be in the table.
        ch, _ = decode_symbol(0, RD_NEG)
        assert ch.not_in_table and ch.octet == 0

    def test_imbalance_bound_implies_not_in_table(self):
        for sym in range(1024):
            if abs(disparity_oracle(sym)) > 2:
                ch, _ = decode_symbol(sym, RD_NEG)
                assert ch.not_in_table, format(sym, "010b")

    def test_wrong_column_sets_disparity_error(self):
        sym_neg, _ = encode_char(Char(0xBC, True), RD_NEG)
        ch, _ = decode_symbol(sym_neg, RD_POS)
        assert ch.disparity_error and ch.octet == 0xBC and ch.is_control

    def test_flags_never_raise(self):
        rd = RD_NEG
        for sym in range(1024):
            ch, rd = decode_symbol(sym, rd)
            assert isinstance(ch, Char)


class TestStreamForms:
    def test_stream_matches_scalar(self):
        rng = np.random.default_rng(2)
        octets = rng.integers(0, 256, 3000).astype(np.uint8)
        ctrl = np.zeros(3000, bool)
        ctrl[::71] = True
        octets[ctrl] = 0xBC
        syms, rd_enc = encode_stream(octets, ctrl, RD_NEG)
        rd = RD_NEG
        for i in range(3000):
            s, rd = encode_char(Char(int(octets[i]), bool(ctrl[i])), rd)
            assert s == syms[i]
        assert rd == rd_enc

        noisy = syms.copy()
        noisy[::311] ^= 0x041
        o, c, nit, derr, rd_dec = decode_stream(noisy, RD_NEG)
        rd = RD_NEG
        for i in range(3000):
            ch, rd = decode_symbol(int(noisy[i]), rd)
            assert (ch.octet, ch.is_control, ch.not_in_table,
                    ch.disparity_error) == (o[i], c[i], nit[i], derr[i])
        assert rd == rd_dec

    def test_stream_rejects_bad_control(self):
        octets = np.array([0x55], dtype=np.uint8)
        with pytest.raises(InvalidControlCode):
            encode_stream(octets, np.array([True]))


class TestSerializeAndAlign:
    def _cgs_bits(self, n=64):
        octets = np.full(n, 0xBC, np.uint8)
        syms, _ = encode_stream(octets, np.ones(n, bool), RD_NEG)
        return serialize(syms), syms

    def test_aligned_stream_offset_zero_identity(self):
        bits, syms = self._cgs_bits()
        offset, back = bit_align(bits)
        assert offset == 0
        assert (back == syms).all()

    def test_shift_by_three(self):
        bits, syms = self._cgs_bits()
        shifted = np.concatenate([np.array([1, 0, 1], np.uint8), bits])
        offset, back = bit_align(shifted)
        assert offset == 3
        assert (back[: len(syms)] == syms).all()

    @pytest.mark.parametrize("shift", range(10))
    def test_all_shifts_recovered(self, shift):
        bits, syms = self._cgs_bits()
        junk = ((np.arange(shift) * 5) % 2).astype(np.uint8)
        offset, back = bit_align(np.concatenate([junk, bits]))
        assert offset == shift

    def test_comma_free_data_raises(self):
        # Rejection-sampling oracle: scan candidate data streams with an
        # independent pattern matcher until one provably comma-free
        # window is found, then assert bit_align refuses it.
        rng = np.random.default_rng(3)
        for _ in range(50):
            octets = rng.integers(0, 256, 200).astype(np.uint8)
            syms, _ = encode_stream(octets, np.zeros(200, bool), RD_NEG)
            bits = serialize(syms)
            window = bits[: 2 * 10 * 64]
            hits = [i for i in range(len(window) - 6)
                    if tuple(window[i:i + 7]) in
                    (codec.COMMA_NEG, codec.COMMA_POS)]
            if not hits:
                with pytest.raises(NoCommaFound):
                    bit_align(bits)
                return
        pytest.fail("rejection sampling found no comma-free stream")


class TestCommaUniqueness:
    def test_comma_only_at_k28_boundaries(self):
        """Brute force over consecutive symbol pairs.

        For every disparity-consistent pair (s1 at rd, s2 at the
        disparity s1 leaves), the 7-bit comma may only appear at a
        symbol boundary belonging to a comma character (K28.5 here).
        K28.7 is excluded as the leading symbol: followed by certain
        codes it forms a false comma across the boundary, which is
        exactly why its use on the wire is restricted to cases this
        link never emits (the transmitter sends no /F/ characters).
        """
        comma_syms = set()
        for rd in (RD_NEG, RD_POS):
            for octet in (0xBC, 0xFC):
                comma_syms.add(encode_char(Char(octet, True), rd)[0])

        def valid_symbols(rd):
            out = []
            for octet in range(256):
                out.append((encode_char(Char(octet), rd)[0], False))
            for octet in K_CODES:
                out.append((encode_char(Char(octet, True), rd)[0], octet == 0xFC))
            return out

        k28_7 = {encode_char(Char(0xFC, True), rd)[0] for rd in (0, 1)}
        violations = []
        k287_false_commas = 0
        for rd in (RD_NEG, RD_POS):
            for s1, _ in valid_symbols(rd):
                d = disparity_oracle(s1)
                rd2 = rd if d == 0 else (RD_POS if d > 0 else RD_NEG)
                bits1 = [(s1 >> (9 - i)) & 1 for i in range(10)]
                for s2, _ in valid_symbols(rd2):
                    bits = bits1 + [(s2 >> (9 - i)) & 1 for i in range(10)]
                    for off in range(0, 14):
                        pat = tuple(bits[off:off + 7])
                        if pat not in (codec.COMMA_NEG, codec.COMMA_POS):
                            continue
                        if off == 0 and s1 in comma_syms:
                            continue
                        if off == 10 and s2 in comma_syms:
                            continue
                        if s1 in k28_7:
                            k287_false_commas += 1
                        else:
                            violations.append((rd, s1, s2, off))
        assert not violations, violations[:5]
        # the documented exception actually exists
        assert k287_false_commas > 0
