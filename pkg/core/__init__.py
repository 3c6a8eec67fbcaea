# Numerical modules for Carnot Hardy Verifier
