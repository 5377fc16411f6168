"""FSO link QoS toolkit.

Models visibility-driven atmospheric attenuation and link-budget SNR, and
predicts SNR from multivariate weather features with a hybrid PCA/ANN
pipeline. See the individual modules:

- :mod:`fsoqos.atmos`    extinction, transmittance, dB attenuation
- :mod:`fsoqos.link`     link-budget SNR
- :mod:`fsoqos.pca`      PCA via cyclic Jacobi diagonalization
- :mod:`fsoqos.mlp`      backprop perceptron
- :mod:`fsoqos.metrics`  MAPE/MAE/RMSE/MSE
- :mod:`fsoqos.dataset`  observation tables, synthesis, splitting
- :mod:`fsoqos.pipeline` hybrid PCA -> ANN workflow
- :mod:`fsoqos.cli`      batch command line
"""

__version__ = "0.1.0"
