"""Long-running ground truth: reduced sizes of mid/late chain coefficients."""
import time
import sympy as sp

B = {j: [sp.Symbol(f"b{j}_{k}") for k in range(9)] for j in range(1, 5)}
NEXT = {B[j][k]: B[j][k + 1] for j in range(1, 5) for k in range(8)}

def D(expr, times=1):
    for _ in range(times):
        out = 0
        for s in expr.free_symbols:
            out += sp.diff(expr, s) * NEXT[s]
        expr = sp.cancel(sp.together(out))
    return expr

def size(tag, e, t0):
    n, d = sp.fraction(sp.cancel(e))
    n = sp.expand(n); d = sp.expand(d)
    print(f"{tag}: num={len(sp.Add.make_args(n))} den={len(sp.Add.make_args(d))} "
          f"ndeg={sp.total_degree(n)} ddeg={sp.total_degree(d)} t={time.time()-t0:.1f}s", flush=True)

t0 = time.time()
b1, b2, b3, b4 = B[1][0], B[2][0], B[3][0], B[4][0]
A20 = sp.cancel((b2 - b3) / (b2 - b1)); A00 = sp.cancel(b1 * A20)
C20 = sp.cancel((b2 - b4) / (b2 - b1)); C00 = sp.cancel(b1 * C20)
rho = 1 / A20
B11 = sp.cancel(-2 * A20 * D(rho)); B01 = sp.cancel(b3 - A20 * D(rho, 2) - A00 / A20)
D21 = sp.cancel(C20 / A20); D11 = sp.cancel(2 * C20 * D(rho)); D01 = sp.cancel(C20 * D(rho, 2) + C00 / A20)
E11 = sp.cancel(D11 - 2 * D(D21)); E01 = sp.cancel(D01 - D(D21, 2) - b4 * D21)
sg = sp.cancel(A20 / B11)
A11 = sp.cancel(-B11 * D(sg) - B01 * sg); A01 = A00
C21 = sp.cancel(C20 + E11 * sg); C11 = sp.cancel(E11 * D(sg) + E01 * sg); C01 = C00
size("A11", A11, t0); size("C11", C11, t0)
rho2 = sp.cancel(B11 / A11)
size("rho2'", D(rho2), t0)
B02 = sp.cancel(B01 - A11 * D(rho2) - A01 * rho2)
size("B02", B02, t0)
D22 = sp.cancel(C21 * rho2)
D12 = sp.cancel(E11 + 2 * C21 * D(rho2) + C11 * rho2)
size("D12", D12, t0)
D02 = sp.cancel(E01 + C21 * D(rho2, 2) + C11 * D(rho2) + C01 * rho2)
size("D02", D02, t0)
E12 = sp.cancel(D12 - 2 * D(D22)); E02 = sp.cancel(D02 - D(D22, 2) - b4 * D22)
size("E12", E12, t0); size("E02", E02, t0)
tau1 = sp.cancel(A11 / B02); tau0 = sp.cancel(A01 / B02)
C22 = sp.cancel(C21 + E12 * tau1)
size("C22", C22, t0)
C12 = sp.cancel(C11 + E12 * (D(tau1) + tau0) + E02 * tau1)
size("C12", C12, t0)
C02 = sp.cancel(C01 + E12 * D(tau0) + E02 * tau0)
size("C02", C02, t0)
r3 = sp.cancel(1 / C22)
F11 = sp.cancel(-2 * C22 * D(r3) - C12 * r3)
size("F11", F11, t0)
F01 = sp.cancel(b4 - C22 * D(r3, 2) - C12 * D(r3) - C02 * r3)
size("F01", F01, t0)
s3 = sp.cancel(C22 / F11)
C13 = sp.cancel(C12 - F11 * D(s3) - F01 * s3)
size("C13", C13, t0)
s4 = sp.cancel(F11 / C13)
F02 = sp.cancel(F01 - C13 * D(s4) - C03 * s4 if (C03 := C02) is not None else 0)
size("F02", F02, t0)
print("DONE", time.time() - t0, flush=True)
