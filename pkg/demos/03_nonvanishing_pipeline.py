# K + L as an explicit nonnegative combination of curves, for L and K + L
# pseudo-effective, together with the step trace that justifies it.
import random

from surfdiv import del_pezzo, hirzebruch, nonvanish, verify_trace
from surfdiv.suite import sample_instance

lat = del_pezzo(1)
L = -2 * lat.canonical  # 6H - 2E
cert, trace = nonvanish(lat, L)
print("K + L =", cert.describe())
for step in trace:
    print(f"  [{step.level}] {step.kind}")
print("verifier:", verify_trace(lat, cert, trace))

# On F_3 the descent goes through the lambda step and ends on the fibration.
f3 = hirzebruch(3)
cert, trace = nonvanish(f3, f3.cls(["5/2", "11/2"]))
lam = trace.of_kind("lambda")[0].data
for idx, kd, td, value in lam["rays"]:
    print(f"F_3: ray {f3.curves[idx].name}: (K+L).D = {kd}, theta.D = {td}, lambda = {value}")
print("F_3: lambda_0 =", lam["lam0"])
print("F_3: K + L =", cert.describe(), "|", verify_trace(f3, cert, trace))

# a few random instances
rng = random.Random(1)
for r in (2, 4, 6):
    dp = del_pezzo(r)
    L = sample_instance(dp, rng)
    cert, trace = nonvanish(dp, L)
    print(f"r = {r}: {len(trace)} steps, certificate {cert.describe()}, {verify_trace(dp, cert, trace)}")
