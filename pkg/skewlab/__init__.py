from skewlab.settings import Config

config = Config()
