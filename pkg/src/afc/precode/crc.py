"""CRC-16/CCITT-FALSE framing (poly 0x1021, init 0xFFFF, no reflection)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CRC_BITS = 16
CRC_POLY = 0x1021
CRC_INIT = 0xFFFF
POLY_NAME = "crc16-ccitt-false"


def crc16(bits) -> int:
    """CRC over a bit sequence, MSB-first, arbitrary (non-byte) length."""
    reg = CRC_INIT
    for b in np.asarray(bits, dtype=np.uint8):
        reg ^= int(b) << 15
        reg <<= 1
        if reg & 0x10000:
            reg ^= CRC_POLY
        reg &= 0xFFFF
    return reg


def crc16_bytes(data: bytes) -> int:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    return crc16(bits)


@dataclass(frozen=True)
class CrcFrame:
    payload: np.ndarray
    crc: np.ndarray
    polynomial: str = POLY_NAME

    @property
    def bits(self) -> np.ndarray:
        return np.concatenate([self.payload, self.crc])


def crc_attach(bits) -> CrcFrame:
    payload = np.asarray(bits, dtype=np.uint8)
    check = crc16(payload)
    crc_bits = np.array([(check >> (CRC_BITS - 1 - i)) & 1 for i in range(CRC_BITS)],
                        dtype=np.uint8)
    return CrcFrame(payload=payload, crc=crc_bits)


def crc_verify(frame: CrcFrame) -> bool:
    return crc16(frame.payload) == int(
        sum(int(b) << (CRC_BITS - 1 - i) for i, b in enumerate(frame.crc)))


def crc_verify_bits(bits) -> bool:
    """Verify a flat payload+crc bit vector."""
    bits = np.asarray(bits, dtype=np.uint8)
    if len(bits) < CRC_BITS:
        return False
    return crc_verify(CrcFrame(payload=bits[:-CRC_BITS], crc=bits[-CRC_BITS:]))
