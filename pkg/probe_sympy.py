"""Ground-truth probe in sympy: true reduced sizes of the chain coefficients."""
import time

import sympy as sp

# derivatives of b1..b4 as independent symbols b[j][k]
B = {j: [sp.Symbol(f"b{j}_{k}") for k in range(9)] for j in range(1, 5)}
NEXT = {B[j][k]: B[j][k + 1] for j in range(1, 5) for k in range(8)}


def D(expr, times=1):
    for _ in range(times):
        out = 0
        for s in expr.free_symbols:
            out += sp.diff(expr, s) * NEXT[s]
        expr = sp.cancel(sp.together(out))
    return expr


def size(e):
    n, d = sp.fraction(sp.cancel(e))
    return (len(sp.Add.make_args(sp.expand(n))), len(sp.Add.make_args(sp.expand(d))))


t0 = time.time()
b1, b2, b3, b4 = B[1][0], B[2][0], B[3][0], B[4][0]

# block-1 solve gives:
A20 = sp.cancel((b2 - b3) / (b2 - b1))
A00 = sp.cancel(b1 * A20)
C20 = sp.cancel((b2 - b4) / (b2 - b1))
C00 = sp.cancel(b1 * C20)

# trio 1 of block 2
rho = 1 / A20
B11 = sp.cancel(-2 * A20 * D(rho))
B01 = sp.cancel(b3 - A20 * D(rho, 2) - A00 / A20)
D21 = sp.cancel(C20 / A20)
D11 = sp.cancel(2 * C20 * D(rho))
D01 = sp.cancel(C20 * D(rho, 2) + C00 / A20)
E11 = sp.cancel(D11 - 2 * D(D21))
E01 = sp.cancel(D01 - D(D21, 2) - b4 * D21)
sg = sp.cancel(A20 / B11)
A11 = sp.cancel(-B11 * D(sg) - B01 * sg)
A01 = A00
C21 = sp.cancel(C20 + E11 * sg)
C11 = sp.cancel(E11 * D(sg) + E01 * sg)
C01 = C00
print("t1", time.time() - t0)
print("B11", size(B11), "A11", size(A11), "C21", size(C21), "C11", size(C11), "E01", size(E01))

# trio 2 of block 2 (sub1 + sub2), then solve
rho2 = sp.cancel(B11 / A11)
B02 = sp.cancel(B01 - A11 * D(rho2) - A01 * rho2)
D22 = sp.cancel(C21 * rho2)
D12 = sp.cancel(E11 + 2 * C21 * D(rho2) + C11 * rho2)
D02 = sp.cancel(E01 + C21 * D(rho2, 2) + C11 * D(rho2) + C01 * rho2)
E12 = sp.cancel(D12 - 2 * D(D22))
E02 = sp.cancel(D02 - D(D22, 2) - b4 * D22)
print("t2", time.time() - t0)
print("B02", size(B02), "E12", size(E12), "E02", size(E02))

tau1 = sp.cancel(A11 / B02)
tau0 = sp.cancel(A01 / B02)
C22 = sp.cancel(C21 + E12 * tau1)
C12 = sp.cancel(C11 + E12 * (D(tau1) + tau0) + E02 * tau1)
C02 = sp.cancel(C01 + E12 * D(tau0) + E02 * tau0)
print("t3", time.time() - t0)
print("C22", size(C22), "C12", size(C12), "C02", size(C02))

# block 3
r3 = sp.cancel(1 / C22)
F11 = sp.cancel(-2 * C22 * D(r3) - C12 * r3)
F01 = sp.cancel(b4 - C22 * D(r3, 2) - C12 * D(r3) - C02 * r3)
print("t4", time.time() - t0)
print("F11", size(F11), "F01", size(F01))

s3 = sp.cancel(C22 / F11)
C13 = sp.cancel(C12 - F11 * D(s3) - F01 * s3)
C03 = C02
print("t5", time.time() - t0)
print("C13", size(C13))

s4 = sp.cancel(F11 / C13)
F02 = sp.cancel(F01 - C13 * D(s4) - C03 * s4)
print("t6", time.time() - t0)
print("F02", size(F02))

# leading symbols wrt b4 for the second table
num = sp.expand(sp.fraction(F02)[0])
hi = max((s for s in num.free_symbols if str(s).startswith("b4")), key=lambda s: int(str(s).split("_")[1]))
print("F02 top b4 derivative:", hi)
for nm, e in [("C22", C22), ("F11", F11), ("C13", C13)]:
    n = sp.expand(sp.fraction(e)[0])
    hi = max((s for s in n.free_symbols if str(s).startswith("b4")), key=lambda s: int(str(s).split("_")[1]))
    print(nm, "top b4 derivative:", hi)
print("TOTAL", time.time() - t0)
