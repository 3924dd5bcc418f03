"""Walk through the algebra layer: field arithmetic, incremental RREF bases,
and the decode round trip.

Run with:  python demos/01_field_and_rank_basics.py
"""

import numpy as np

from micnsim.gf import Field, RrefBasis

rng = np.random.default_rng(42)
field = Field(8)
print(f"working in {field}: {field.order} elements, generator {field.generator}")
print(f"0x02 * 0x80 = 0x{field.mul(0x02, 0x80):02X}")
print(f"inverse of 0xCA is 0x{field.inv(0xCA):02X} "
      f"(product: {field.mul(0xCA, field.inv(0xCA))})")

# Encode a tiny generation: four 16-byte segments.
n, size = 4, 16
segments = [bytes(rng.integers(0, 256, size=size, dtype=np.uint8)) for _ in range(n)]
print(f"\ngeneration: {n} segments of {size} bytes")

basis = RrefBasis(field, n, payload_size=size)
sent = 0
while basis.rank < n:
    coeffs = rng.integers(0, 256, size=n, dtype=np.uint8)
    payload = np.zeros(size, dtype=np.uint8)
    for j, c in enumerate(coeffs):
        field.addmul_into(payload, np.frombuffer(segments[j], dtype=np.uint8), int(c))
    innovative = basis.insert(coeffs, payload)
    sent += 1
    print(f"  packet {sent}: coeffs={list(map(int, coeffs))} "
          f"innovative={innovative} rank={basis.rank}")

decoded = basis.decode()
print(f"\ndecoded == original segments: {decoded == segments}")
print(f"pivot set (leading indices the span can produce): {sorted(basis.pivots)}")

# Re-encode: fresh combinations with a chosen leading index.
for i in (1, 3):
    vec, _ = basis.reencode(i, rng)
    lead = int(np.nonzero(vec)[0][0]) + 1
    print(f"re-encoded for leading index {i}: {list(map(int, vec))} (leads at {lead})")
