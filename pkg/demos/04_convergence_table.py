"""
How fast the top probability approaches one
===========================================

With the r-optimal rule the highest-valued agent wins with probability
above 99% from fourteen agents on; the simpler GL rule needs a hundred.
"""

import numpy as np

from rankmech.harness import convergence_table, gl_convergence_threshold, table_csv

rows = convergence_table(3, 25)
print(table_csv(rows[6:15]))

# Float view for a quick look at the gap to the GL rule (1 - 1/n).
n = np.array([r.n for r in rows])
pi1 = np.array([float(r.pi1) for r in rows])
gap = pi1 - (1 - 1 / n)
print("largest gain over GL:", gap.max().round(4), "at n =", int(n[gap.argmax()]))
print("GL needs n =", gl_convergence_threshold("99/100"), "for a 99% top probability")
