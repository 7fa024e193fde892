# Intersection lattices of a few rational surfaces, and the (-1)-curves on
# blowups of the plane at generic points.
from surfdiv import check_signature, del_pezzo, hirzebruch, projective_plane
from surfdiv.models import enumerate_minus_one_classes

p2 = projective_plane()
print("P^2: K^2 =", p2.square(p2.canonical))

for n in range(4):
    f = hirzebruch(n)
    s = f.curve_by_name("s")
    print(f"F_{n}: K^2 = {f.square(f.canonical)}, s^2 = {f.square(s.cls)}")

# every lattice here has signature (1, rho - 1)
for r in range(1, 9):
    lat = del_pezzo(r)
    report = check_signature(lat)
    classes = enumerate_minus_one_classes(lat)
    print(f"r = {r}: signature {report.signature}, {len(classes)} (-1)-classes")

# the six lines on the blowup at three points
dp6 = del_pezzo(3)
print([c.name for c in enumerate_minus_one_classes(dp6)])
