"""MD4 message digest (RFC 1320).

hashlib stopped exposing md4 once OpenSSL 3 moved it to the legacy provider,
but the NT password hash is defined as MD4 over UTF-16LE, so a local
implementation is needed. Not for general cryptographic use.
"""

from __future__ import annotations

import struct

_MASK = 0xFFFFFFFF

# round 2 and round 3 process the message words in these fixed orders
_R2_ORDER = (0, 4, 8, 12, 1, 5, 9, 13, 2, 6, 10, 14, 3, 7, 11, 15)
_R3_ORDER = (0, 8, 4, 12, 2, 10, 6, 14, 1, 9, 5, 13, 3, 11, 7, 15)


def _rotl(x: int, s: int) -> int:
    return ((x << s) | (x >> (32 - s))) & _MASK


def md4(data: bytes) -> bytes:
    """Return the 16-byte MD4 digest of data."""
    a, b, c, d = 0x67452301, 0xEFCDAB89, 0x98BADCFE, 0x10325476

    bit_len = len(data) * 8
    data = data + b"\x80"
    data += b"\x00" * ((56 - len(data) % 64) % 64)
    data += struct.pack("<Q", bit_len)

    for off in range(0, len(data), 64):
        x = struct.unpack("<16I", data[off:off + 64])
        aa, bb, cc, dd = a, b, c, d

        for i in range(16):
            s = (3, 7, 11, 19)[i % 4]
            val = (a + ((b & c) | (~b & d)) + x[i]) & _MASK
            a, b, c, d = d, _rotl(val, s), b, c

        for i in range(16):
            s = (3, 5, 9, 13)[i % 4]
            val = (a + ((b & c) | (b & d) | (c & d)) + x[_R2_ORDER[i]] + 0x5A827999) & _MASK
            a, b, c, d = d, _rotl(val, s), b, c

        for i in range(16):
            s = (3, 9, 11, 15)[i % 4]
            val = (a + (b ^ c ^ d) + x[_R3_ORDER[i]] + 0x6ED9EBA1) & _MASK
            a, b, c, d = d, _rotl(val, s), b, c

        a = (a + aa) & _MASK
        b = (b + bb) & _MASK
        c = (c + cc) & _MASK
        d = (d + dd) & _MASK

    return struct.pack("<4I", a, b, c, d)


def md4_hexdigest(data: bytes) -> str:
    return md4(data).hex()
