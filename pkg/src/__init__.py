"""quadcurl - H(curl²) 协调有限元求解四阶旋度特征值问题"""

__version__ = "0.1.0"
__author__ = "QuadCurl Team"
