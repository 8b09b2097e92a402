# Necessary conditions for a fifth order operator, checked on sampled data
import numpy as np

import dispersym

x0, x1, n = -8.0, 8.0, 4097

coeffs = {
    name: dispersym.SampledFunction.from_function(fn, x0, x1, n)
    for name, fn in {
        'b': lambda x: np.zeros(x.shape),
        'c': lambda x: 0.1 * np.sin(x),
        'd': lambda x: 0.05j * dispersym.bump(x, 0.0, 4.0),
    }.items()
}

report = dispersym.check_conditions(5, coeffs, letters=True)

for row in report.rows():
    print(row['label'], row['exponent'], row['sup_ratio'])
