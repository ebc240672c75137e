"""
Configuración del panel de administración para el historial de ejecuciones
"""

from django.contrib import admin

from .models import Ejecucion


@admin.register(Ejecucion)
class EjecucionAdmin(admin.ModelAdmin):
    """
    Administración del modelo Ejecucion
    """
    list_display = ('fecha_ejecucion', 'metodo', 'hash_corto', 'costo_exacto', 'brecha_wardrop', 'codigo_salida', 'duracion')
    list_filter = ('metodo', 'codigo_salida', 'fecha_ejecucion')
    search_fields = ('hash_escenario', 'directorio_salida', 'version')
    readonly_fields = ('id', 'fecha_ejecucion', 'hash_escenario', 'version', 'duracion')
    ordering = ('-fecha_ejecucion',)

    fieldsets = (
        ('Información General', {
            'fields': ('id', 'metodo', 'fecha_ejecucion', 'codigo_salida')
        }),
        ('Resultado', {
            'fields': ('costo_exacto', 'brecha_wardrop', 'duracion', 'directorio_salida')
        }),
        ('Procedencia', {
            'fields': ('hash_escenario', 'version', 'parametros'),
            'classes': ('collapse',)
        }),
    )

    def hash_corto(self, obj):
        return obj.hash_escenario[:12]
    hash_corto.short_description = 'Escenario'

    def has_add_permission(self, request):
        """Las ejecuciones solo se crean desde los comandos"""
        return False

    def has_change_permission(self, request, obj=None):
        return False


admin.site.site_header = 'Simulador de Codificación en Reversa'
admin.site.site_title = 'Simulador'
admin.site.index_title = 'Historial de ejecuciones'
