# Capacity-distortion evaluation for state-dependent MACs with generalized feedback
