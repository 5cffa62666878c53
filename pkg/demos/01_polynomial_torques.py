"""Joint torques of a serial robot are polynomials in a small set of variables.

Write every revolute angle as its cosine and sine, keep prismatic positions
as they are, and collect velocity products and accelerations.  The torque of
each joint is then an exact linear combination of finitely many monomials in
these variables.  This script counts those monomials and verifies the claim
with a least-squares fit on random states.

Run with ``python demos/01_polynomial_torques.py``.
"""

from gipkernel.dynamics import builtin_robot
from gipkernel.features import (
    AugmentedLayout,
    Convention,
    augment,
    certify_polynomial_dynamics,
    count_monomials,
    enumerate_monomials,
    random_states,
)

# %%
# A two-link arm with one revolute and one prismatic joint.

robot = builtin_robot("rp")
print("joint pattern:", "".join(t.letter for t in robot.joint_types))

state = random_states(robot.joint_types, 1, rng=0)
x = augment(state, robot.joint_types)
print("augmented input variables:")
for name, value in zip(AugmentedLayout(robot.joint_types).variable_names(), x.as_array()[0]):
    print(f"  {name:>10s} = {value:+.4f}")

# %%
# How many monomials are needed?  Two enumeration rules are available.
# The GIP rule allows at most one velocity product or acceleration per
# monomial, which is all the rigid-body torque ever needs; the full rule
# allows any combination up to the same total degree.

for letters in ("RP", "RRPR", "RRRRRR"):
    full = count_monomials(letters, Convention.FULL)
    gip = count_monomials(letters, Convention.GIP_RKHS)
    reduced = count_monomials(letters, Convention.GIP_RKHS, reduced=True)
    print(f"{letters:>7s}: full {full:>14,d}  gip {gip:>10,d}  gip without sin^2 {reduced:>9,d}")

# %%
# Fit the noiseless torques onto the reduced GIP monomials.  A relative
# residual at round-off level means the torque lies in their span.

monomials = enumerate_monomials(robot.joint_types, reduced=True)
samples = random_states(robot.joint_types, 2 * len(monomials), rng=1)
for report in certify_polynomial_dynamics(robot, samples, monomials=monomials):
    print(f"joint {report.joint_index + 1}: residual {report.residual:.2e} "
          f"with {report.n_monomials} monomials")

# %%
# Remove every monomial that contains a velocity product.  The centrifugal
# and Coriolis torques can no longer be represented and the residual jumps.

ablated = monomials.without(monomials.layout.vel)
for report in certify_polynomial_dynamics(robot, samples, monomials=ablated):
    print(f"joint {report.joint_index + 1}: residual without velocity terms {report.residual:.2e}")

