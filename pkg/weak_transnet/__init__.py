"""
Weak TransNet
Безсітковий розв'язувач еліптичних рівнянь у слабкій формі Петрова-Гальоркіна
з нейронними базисами TransNet та гаусовими тестовими функціями
"""

__version__ = "1.0.0"
__author__ = "Студент"
__description__ = "Weak TransNet: WTN, F-WTN, PoU-WTN та базові методи SF і DRM"
