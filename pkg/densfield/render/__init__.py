from densfield.render.renderer import RenderView, CompositeResult, PatchRender, sample_color, sample_colors, \
    composite, render_rays, render_patch, render_patches, render_depth_map
