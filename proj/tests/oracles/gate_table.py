"""Evaluates the mixer gating rules on 50 fixed inputs and prints a C++ table.

Written independently of the C++ implementation; the output is frozen in
tests/unit/gate_cases.inc.
"""
import math
import random

SIZES = [264 // 4, 256 // 4, 128 // 4, 256 // 4, 256 // 4, 256 // 4, 1536 // 4]


def evaluate(partial, last4, low, longest, bitpos):
    def history(i):
        if i == 0:
            return partial
        return (last4 >> (8 * (i - 1))) & 0xFF

    s1 = 8 + history(1)
    s2 = history(0)
    s3 = low + 8 * ((last4 // 32) % 8)
    if history(1) == history(2):
        s3 += 64
    s4 = history(2)
    s5 = history(3)
    s6 = 0 if longest == 0 else math.floor(math.log2(longest) * 16 + 0.5)
    if bitpos == 0:
        s7 = history(3) // 128 + (history(1) & 240) + 4 * (history(2) // 64) + 2 * (last4 // 2**31)
    else:
        s7 = history(0) * 2 ** (8 - bitpos)
        if bitpos == 1:
            s7 += history(3) // 2
        s7 = min(bitpos, 5) * 256 + history(1) // 32 + 8 * (history(2) // 32) + (s7 & 192)
    return [s1, s2, s3, s4, s5, s6, s7]


def cases():
    fixed = [
        (1, 0, 0, 0, 0),
        (1, 0x00000505, 3, 1, 0),
        (1, 0xFFFFFFFF, 7, 65534, 0),
        (1, 0x80000000, 0, 256, 0),
        (3, 0x12345678, 2, 2, 1),
        (255, 0xFFFFFFFF, 7, 65534, 7),
        (2, 0x0000FFFF, 5, 3, 1),
        (128, 0xC0C0C0C0, 1, 1000, 7),
    ]
    rng = random.Random(20240)
    out = list(fixed)
    while len(out) < 50:
        bitpos = rng.randrange(8)
        partial = (1 << bitpos) | rng.randrange(1 << bitpos)
        last4 = rng.getrandbits(32)
        if rng.random() < 0.2:
            b = rng.randrange(256)
            last4 = (last4 & 0xFFFF0000) | (b << 8) | b
        low = rng.randrange(8)
        longest = rng.choice([0, 1, rng.randrange(2, 64), rng.randrange(64, 65535)])
        out.append((partial, last4, low, longest, bitpos))
    return out


def main():
    print("// partial, lastFourBytes, lowOrderMatches, longestMatch, bitPosition -> raw indices, reduced indices")
    for c in cases():
        raw = evaluate(*c)
        red = [r % s for r, s in zip(raw, SIZES)]
        print("{%d, 0x%08Xu, %d, %d, %d, {%s}, {%s}}," % (*c, ", ".join(map(str, raw)), ", ".join(map(str, red))))


if __name__ == "__main__":
    main()
