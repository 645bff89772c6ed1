"""Heating and cooling of an optically levitated nanosphere by thermal light.

Modules
-------
photonics     light-source models (thermal and laser) and spectral intensity
scattering    Rayleigh recoil heating, Doppler damping, photon bath
environment   free-molecular gas damping
dynamics      three-axis Langevin ensembles and the reheat protocol
analysis      PSD estimation and the fits applied to reheating data
cli           ``levikin`` command-line front end
"""

__version__ = "0.1.0"
