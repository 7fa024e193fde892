# On E x E, a nef class with irrational coordinates that is not a finite
# nonnegative combination of curves: graph curves G(p, q) come arbitrarily
# close to it, as (q - p*sqrt(2))^2 < 1/p shows.
from surfdiv import abelian_product
from surfdiv.cones import rationalize_effective
from surfdiv.models import graph_generators, remark_counterexample, remark_nef_class
from surfdiv.scalars import fmt

model = abelian_product()
report = remark_counterexample(model, 10**6)
print("M =", [fmt(x) for x in report.M.coords], " M^2 =", fmt(report.M_square))
for row in report.rows[:6]:
    print(f"p = {row.p:>4}, q = {row.q:>4}: M.G = {fmt(row.value):<18} ~ {float(row.value):.3g} < 1/{row.p}")
print("holds for", len(report.rows), "convergents:", report.holds)

res = rationalize_effective(model.lattice, remark_nef_class(model), graph_generators(model, 100))
print("M against graphs with p <= 100:", res.status, "separator", [fmt(x) for x in res.separator.coords])
