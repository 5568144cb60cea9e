#!/usr/bin/env python3
"""Uniform grids, the straight-through gradient rule, and the activation
lookup tables that replace sigmoid/tanh units behind the ADCs."""

import numpy as np

from xbarlstm import QuantSpec, build_lut, quantize, ste_backward

spec = QuantSpec(bits=4, v_min=-1.0, v_max=1.0)
print(f"A 4-bit grid over [-1, 1]: {spec.levels} levels, step {spec.step:.4f}")
print("grid:", np.round(spec.grid(), 4).tolist())
print()

print("Zero is not representable on an even symmetric grid; the tie at the")
print("midpoint rounds toward +inf:")
print("  quantize(0.0)  ->", quantize(0.0, spec))
print("  quantize(-0.07)->", quantize(-0.07, spec))
print("  quantize(1.7)  ->", quantize(1.7, spec), "(clipped to the endpoint)")
print()

one_bit = QuantSpec.symmetric(1, 1.0)
print("At 1 bit the grid degenerates to the endpoints (binary weights):")
print("  quantize(0.3) ->", quantize(0.3, one_bit),
      "  quantize(-2.0) ->", quantize(-2.0, one_bit))
print()

print("The straight-through estimator passes gradient only inside the range:")
for x in (0.3, 1.0, 1.5):
    print(f"  ste_backward(g=1.0, x={x:4.1f}) -> {ste_backward(1.0, x, spec)}")
print()

lut = build_lut("tanh", QuantSpec(4, -2.0, 2.0), QuantSpec(4, -1.0, 1.0))
print("A 4-bit ADC drives a 16-entry tanh table (outputs snapped to 4 bits):")
for code in range(0, 16, 3):
    print(f"  code {code:2d} (input {lut.in_spec.grid()[code]:+.3f}) -> {lut(code):+.4f}")
