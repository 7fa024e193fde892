# Deciding pseudo-effectivity and nefness exactly, and splitting a class
# into its nef part and negative part.
from surfdiv import del_pezzo, extremal_rays, is_nef, is_pseudo_effective, zariski_decompose
from surfdiv.scalars import fmt


def show(v):
    return "(" + ", ".join(fmt(x) for x in v) + ")"


lat = del_pezzo(1)  # basis H, E1
d = lat.cls([1, 2])  # H + 2E

res = is_pseudo_effective(lat, d)
print("H + 2E pseudo-effective:", bool(res), "=", res.certificate.describe())

res = is_pseudo_effective(lat, lat.cls([0, -1]))
h = res.separator
print("-E pseudo-effective:", bool(res), "separator h =", show(h.coords),
      "pairings with curves:", show(lat.pair(h, c.cls) for c in lat.curves))

res = is_nef(lat, lat.unit(1))
print("E nef:", bool(res), "witness", res.witness.name, fmt(res.value))

z = zariski_decompose(lat, d)
print("Zariski: P =", show(z.P.coords), "N =", " + ".join(f"{fmt(a)}*{c.name}" for c, a in zip(z.N_support, z.N_coeffs)))

dp = del_pezzo(4)
print("extremal rays on the blowup at 4 points:", [r.generator.name for r in extremal_rays(dp)])
