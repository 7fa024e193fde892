# Singular surfaces through their minimal resolutions: the boundary B with
# K_Y + B = h^*K_X, transport of classes, and -K_X as an effective class.
from surfdiv import build_singular, hirzebruch
from surfdiv.resolution import anti_canonical, pullback, pushforward, toric_singular_models

cone = build_singular(hirzebruch(2), ["s"])  # the quadric cone P(1,1,2)
print("A1: B =", cone.B)

f = cone.resolution.curve_by_name("f").cls
print("h^* h_* f =", pullback(cone, pushforward(cone, f)), "(coordinates in s, f)")

result = anti_canonical(cone)
print("-K_X =", result.certificate.describe())

s3 = build_singular(hirzebruch(3), ["s"])
print("(-3)-curve: b =", s3.b_coeffs[0])

for s in toric_singular_models(8):
    squares = [int(s.resolution.square(e.cls)) for e in s.exceptional]
    res = anti_canonical(s)
    print(f"rank {s.resolution.rank}, exceptional squares {squares}, B = {[str(b) for b in s.b_coeffs]}:",
          "-K_X =", res.certificate.describe())
