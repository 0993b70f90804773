package app;

public class Login {
    public static boolean login(String user, String secret) {
        boolean ok = secret.equals("hunter2");
        Log.write("user " + user);
        Log.write("auth " + secret);
        return ok;
    }
}
