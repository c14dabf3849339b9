"""Tour of the circuit simulator: states, gates, noise, and measurement.

Run: python3 demos/01_simulator_basics.py
"""
import numpy as np

from vqcboost import NoiseModel, QuantumState
from vqcboost.qstate import (apply_cnot, apply_single_qubit_rotation,
                             measure_projectors, rotation_matrix)

# Qubit 1 is the most significant bit of the basis index, so |100> on three
# qubits is index 4.
state = QuantumState.zero(3)
print("initial amplitudes:", np.round(state.data.real, 3))

# Rotate qubit 1 by pi/2 about x, then entangle it with qubit 2.
state = apply_single_qubit_rotation(state, 1, "x", np.pi / 2)
state = apply_cnot(state, 1, 2)
print("after Rx and CNOT:", np.round(state.data, 3))

probs = measure_projectors(state, [1, 2])
print("joint distribution of qubits 1,2:", np.round(probs, 3))

# The same circuit under depolarizing CNOT noise needs a density matrix.
rho = QuantumState.zero(3).to_density_matrix()
rho = apply_single_qubit_rotation(rho, 1, "x", np.pi / 2)
rho = apply_cnot(rho, 1, 2, NoiseModel(p_depol=0.2))
print("noisy distribution of qubits 1,2:",
      np.round(measure_projectors(rho, [1, 2]), 3))

# Noise flattens the ideal (0.5, 0, 0, 0.5) correlation toward uniform.
print("rotation matrix Rz(pi):")
print(np.round(rotation_matrix("z", np.pi), 3))
