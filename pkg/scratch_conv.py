import numpy as np
from ksns.spectral import *
from ksns.model import *
from ksns.dynamics import *
from ksns import Grid


def direct_convolution(ah, bh):
    """(a*b)_hat(xi) = (1/N^2) sum_eta a_hat(eta) b_hat(xi - eta), circular."""
    N = ah.shape[0]
    out = np.zeros_like(ah)
    for p in range(N):
        for q in range(N):
            acc = 0.0 + 0.0j
            for a in range(N):
                for b in range(N):
                    acc += ah[a, b] * bh[(p - a) % N, (q - b) % N]
            out[p, q] = acc / N**2
    return out


N = 16
g = Grid(N, 2 * np.pi)
x1, x2 = g.x
u = VectorField(scalar_from_values(g, np.sin(x2)), scalar_from_values(g, np.cos(2 * x1)))
print("div u:", norm(divergence(u), "L2"))
params = make_params(g, sensitivity=SensitivityModel(c_max=1.0), phi_amplitude=0.0)
st = State(n=constant_field(g, 0.0), c=constant_field(g, 0.0), u=u, time=0.0)
t = assemble_tendency(st, params, "full")
print("dn:", norm(t.dn, "L2"), "dc:", norm(t.dc, "L2"))

# oracle: u.grad u per component via direct convolution of spectra
u1h, u2h = u.spectral()
k1, k2 = g.wavenumbers
du1dx1 = 1j * k1 * u1h
du1dx2 = 1j * k2 * u1h
du2dx1 = 1j * k1 * u2h
du2dx2 = 1j * k2 * u2h
adv1 = direct_convolution(u1h, du1dx1) + direct_convolution(u2h, du1dx2)
adv2 = direct_convolution(u1h, du2dx1) + direct_convolution(u2h, du2dx2)
adv = VectorField(scalar_from_spectral(g, adv1), scalar_from_spectral(g, adv2))
oracle = leray_project(adv)
o1, o2 = oracle.spectral()

# expected du_nonstiff = -P(u.grad u); stiff = d3 lap u
e1, e2 = t.du_nonstiff.spectral()
print("quadratic term vs oracle:",
      np.max(np.abs(e1 + o1)) / N**2, np.max(np.abs(e2 + o2)) / N**2)

s1, s2 = t.du_stiff.spectral()
lap1, lap2 = laplacian_vector(u).spectral()
print("stiff = d3 lap u:", np.max(np.abs(s1 - params.d3 * lap1)))

# divergence-free tendency
print("div du_nonstiff:", norm(divergence(t.du_nonstiff), "L2"))

# mean of dn is zero: nontrivial state
rng = np.random.default_rng(5)
smooth = lambda: dealias(mollify(scalar_from_values(g, rng.standard_normal((N, N))), 0.5))
n = scalar_from_values(g, 1.0 + 0.3 * smooth().real_values())
c = scalar_from_values(g, 0.6 + 0.2 * smooth().real_values())
params2 = make_params(g, sensitivity=SensitivityModel(c_max=2.0), phi_amplitude=0.5, epsilon=0.2)
st2 = State(n=dealias(n), c=dealias(c), u=u, time=0.0).dealiased()
for level in ("full", "mod1"):
    t2 = assemble_tendency(st2, params2, level)
    dn = t2.dn
    print(level, "mean dn:", abs(mean_value(dn)), "scale:", norm(dn, "Linf"))

# n=c=const, u=0 example: dn=0, dc=-kappa(const)*const_n, du = P(const n grad phi)
stc = State(n=constant_field(g, 2.0), c=constant_field(g, 0.5), u=zero_vector(g), time=0.0)
params3 = make_params(g, sensitivity=SensitivityModel(c_max=1.0), phi_amplitude=1.0)
t3 = assemble_tendency(stc, params3, "full")
print("const: dn", norm(t3.dn, "L2"), "dc vs -kappa(c)*n:",
      np.max(np.abs(t3.dc.real_values() - (-(0.5) * 2.0))))
gp = params3.grad_potential
pforce = leray_project(VectorField(
    scalar_from_values(g, 2.0 * gp.u1.real_values()),
    scalar_from_values(g, 2.0 * gp.u2.real_values())))
d1, d2c = t3.du_nonstiff.spectral()
p1, p2 = pforce.spectral()
print("du vs P(n grad phi):", np.max(np.abs(d1 - p1)) / N**2, np.max(np.abs(d2c - p2)) / N**2)

# mod1 -> full consistency, eps^2 slope on a fixed band-limited state
dists = []
epss = [0.2, 0.1, 0.05]
t_full = assemble_tendency(st2, params2, "full")
for eps in epss:
    import dataclasses
    p = dataclasses.replace(params2, epsilon=eps)
    t_eps = assemble_tendency(st2, p, "mod1")
    d = np.sqrt(
        norm(scalar_from_spectral(g, t_eps.dn.spectral() - t_full.dn.spectral()), "L2") ** 2
        + norm(scalar_from_spectral(g, t_eps.dc.spectral() - t_full.dc.spectral()), "L2") ** 2
        + norm(VectorField(
            scalar_from_spectral(g, t_eps.du.spectral()[0] - t_full.du.spectral()[0]),
            scalar_from_spectral(g, t_eps.du.spectral()[1] - t_full.du.spectral()[1])), "L2") ** 2)
    dists.append(d)
slope = np.polyfit(np.log(epss), np.log(dists), 1)[0]
print("eps slope:", slope, dists)

# mod2 with R=inf proxy (huge R), k large: reproduces mod1 on the annulus
import dataclasses
kbig = 64.0
p_mod2 = dataclasses.replace(params2, trunc_k=kbig, cutoff_R=1e9)
# state must be annulus-supported: mean-free
st3 = State(
    n=truncate_jk(st2.n, kbig).to_real(),
    c=truncate_jk(st2.c, kbig).to_real(),
    u=VectorField(truncate_jk(st2.u.u1, kbig).to_real(), truncate_jk(st2.u.u2, kbig).to_real()),
    time=0.0)
t_m2 = assemble_tendency(st3, p_mod2, "mod2")
t_m1 = assemble_tendency(st3, p_mod2, "mod1")
for name, a, b in [
    ("dn", t_m2.dn_nonstiff, truncate_jk(t_m1.dn_nonstiff, kbig)),
    ("dc", t_m2.dc_nonstiff, truncate_jk(t_m1.dc_nonstiff, kbig)),
]:
    print("mod2 vs J_k mod1", name, np.max(np.abs(a.spectral() - b.spectral())) / N**2)
m2u1, m2u2 = t_m2.du_nonstiff.spectral()
m1u = truncate_jk_vector(t_m1.du_nonstiff, kbig)
m1u1, m1u2 = m1u.spectral()
print("mod2 vs J_k mod1 du:", np.max(np.abs(m2u1 - m1u1)) / N**2, np.max(np.abs(m2u2 - m1u2)) / N**2)
