# Certificates are self-contained JSON; the checker rebuilds everything from
# the document. The same flow is available as `surfdiv nonvanish JOB --out FILE`
# followed by `surfdiv verify FILE`.
import json
import os

from surfdiv import del_pezzo, nonvanish
from surfdiv.certificate import certificate_document, dumps, verify_text
from surfdiv.cli import main

lat = del_pezzo(2)
cert, trace = nonvanish(lat, -2 * lat.canonical)
text = dumps(certificate_document(lat, cert, trace))
print("certificate:", len(text), "bytes;", verify_text(text))

doc = json.loads(text)
doc["coefficients"][0]["value"] = "7"
print("edited:", verify_text(json.dumps(doc)))

here = os.path.dirname(os.path.abspath(__file__))
print("exit status", main(["run", os.path.join(here, "jobs", "blowup_anticanonical.txt")]))
print("exit status", main(["antik", os.path.join(here, "jobs", "quadric_cone.txt")]))
