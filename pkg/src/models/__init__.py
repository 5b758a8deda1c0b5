"""
Data models: poses, camera, images, features, configuration and results
"""
