package app;

public class Files {
    static String clean(String p) {
        return p.replace("..", "");
    }

    public static String resolve(String p) {
        String full = "/srv/" + p;
        return full;
    }
}
