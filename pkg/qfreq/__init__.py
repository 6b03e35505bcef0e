"""
qfreq - Almgren frequency, singular Q-points and discrete Dirichlet minimizers
for 2-dimensional Q-valued maps given by plane algebraic curves
"""
__version__ = "1.0.0"
